"""Interactive design-space exploration: active-subspace summary plots
linked 1:1:1 to a blade-geometry catalog, exposed as a library, CLI, and
JSON service.
"""

from .dataset import (DesignSample, DesignTable, DomainSpec, SyntheticOracle,
                      denormalize_design, evaluate_oracle, load_design_table,
                      normalize_design, sample_uniform_doe)
from .errors import AeroVRError, DataError, NumericalError, PreconditionError
from .estimator import ActiveSubspaceReducer
from .geometry import (GeometryCatalog, GeometryDiff, TriangleMesh,
                       diff_meshes, mesh_stats, parse_stl, serialize_stl)
from .surrogate import (ActiveSubspace, CovarianceEstimate, QuadraticModel,
                        RidgeProfile, SummaryPlot, build_summary_plot,
                        covariance_analytic, covariance_monte_carlo,
                        eigendecompose, finalize_subspace, fit_quadratic,
                        fit_ridge_profile, gradient, predict_ridge,
                        principal_angle, project, select_dimension)

__version__ = "0.1.0"
