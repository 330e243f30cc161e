"""Quadratic surrogate, gradient covariance, active subspace, summary plots.

Pipeline: fit a global quadratic 0.5 x'Ax + c'x + d0 by least squares,
form the gradient covariance under the uniform hypercube density,
eigendecompose it, pick the subspace dimension from the eigenvalue decay,
project designs, and fit a low-order polynomial profile in the projected
coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
import scipy.linalg

from .dataset import DesignTable
from .errors import DataError, NumericalError

RANK_TOL = 1e-10
GAP_THRESHOLD = 10.0


@dataclass(frozen=True)
class QuadraticModel:
    """f(x) ~ 0.5 x'Ax + c'x + d0 with A stored exactly symmetric."""

    A: np.ndarray
    c: np.ndarray
    d0: float

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or c.shape != (A.shape[0],):
            raise DataError(f"inconsistent quadratic shapes A{A.shape}, c{c.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(c))
                and np.isfinite(self.d0)):
            raise DataError("quadratic model has non-finite entries")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d0", float(self.d0))

    @property
    def d(self) -> int:
        return self.c.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return 0.5 * np.einsum("ni,ij,nj->n", x, self.A, x) + x @ self.c + self.d0


@dataclass(frozen=True)
class CovarianceEstimate:
    """Estimate of the gradient outer-product covariance."""

    C_hat: np.ndarray
    method: str  # "analytic" | "monte-carlo"
    mc_samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        C = np.asarray(self.C_hat, dtype=float)
        scale = np.max(np.abs(C)) or 1.0
        if np.max(np.abs(C - C.T)) > 1e-12 * scale:
            raise DataError("covariance estimate is not symmetric")
        C = 0.5 * (C + C.T)
        C.setflags(write=False)
        object.__setattr__(self, "C_hat", C)


@dataclass
class ActiveSubspace:
    """Eigenpairs of the covariance estimate plus the chosen dimension m."""

    eigenvalues: np.ndarray
    W: np.ndarray
    m: int | None = None
    degenerate: bool = False

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def W1(self) -> np.ndarray:
        if self.m is None:
            raise DataError("subspace dimension m is unset")
        return self.W[:, : self.m]

    @property
    def W2(self) -> np.ndarray:
        if self.m is None:
            raise DataError("subspace dimension m is unset")
        return self.W[:, self.m:]


@dataclass(frozen=True)
class SummaryPlot:
    """Projected coordinates paired with qoi values, index-aligned with the table."""

    qoi_name: str
    m: int
    design_index: np.ndarray  # (N,) ints, exactly 0..N-1
    y: np.ndarray             # (N, m)
    f: np.ndarray             # (N,)

    def point(self, i: int) -> dict:
        return {"i": int(self.design_index[i]),
                "y": [float(v) for v in self.y[i]],
                "f": float(self.f[i])}


@dataclass(frozen=True)
class RidgeProfile:
    """Total-degree polynomial in the m projected coordinates."""

    qoi_name: str
    m: int
    degree: int
    coefficients: np.ndarray
    training_rmse: float

    def __call__(self, y: np.ndarray) -> np.ndarray:
        V = _poly_design_matrix(np.atleast_2d(np.asarray(y, dtype=float)),
                                self.degree)
        return V @ self.coefficients


def _quadratic_monomials(d: int):
    """Index pairs (i, j), i <= j, in the fixed basis order."""
    return list(combinations_with_replacement(range(d), 2))


def quadratic_basis_size(d: int) -> int:
    return 1 + d + d * (d + 1) // 2


def fit_quadratic(table: DesignTable, qoi_name: str,
                  ridge_regularization: float = 0.0) -> QuadraticModel:
    """Least-squares global quadratic over the basis {1, x_i, x_i x_j (i<=j)}."""
    if qoi_name not in table.qoi:
        raise DataError(f"unknown qoi {qoi_name!r}; table has {table.qoi_names}")
    if ridge_regularization < 0:
        raise DataError("ridge_regularization must be >= 0")
    x, f = table.x, table.qoi[qoi_name]
    d, n = table.d, table.n
    p = quadratic_basis_size(d)
    if n < p and ridge_regularization == 0.0:
        raise DataError(
            f"need N >= {p} samples for an unregularized quadratic fit in "
            f"{d} dimensions, got N = {n}"
        )
    pairs = _quadratic_monomials(d)
    V = np.empty((n, p))
    V[:, 0] = 1.0
    V[:, 1: d + 1] = x
    for k, (i, j) in enumerate(pairs):
        V[:, d + 1 + k] = x[:, i] * x[:, j]

    if ridge_regularization > 0.0:
        lam = np.sqrt(ridge_regularization)
        V_aug = np.vstack([V, lam * np.eye(p)])
        f_aug = np.concatenate([f, np.zeros(p)])
        beta, *_ = np.linalg.lstsq(V_aug, f_aug, rcond=None)
    else:
        beta, _, rank, sv = np.linalg.lstsq(V, f, rcond=RANK_TOL)
        if rank < p:
            raise NumericalError(
                f"rank-deficient quadratic design matrix: estimated rank "
                f"{rank} < {p}; supply more samples or enable regularization"
            )

    d0 = float(beta[0])
    c = beta[1: d + 1]
    A = np.zeros((d, d))
    for k, (i, j) in enumerate(pairs):
        coef = beta[d + 1 + k]
        if i == j:
            A[i, i] = 2.0 * coef
        else:
            # split the x_i x_j coefficient evenly across A_ij and A_ji
            A[i, j] = A[j, i] = coef
    return QuadraticModel(A=A, c=c, d0=d0)


def gradient(model: QuadraticModel, x: np.ndarray) -> np.ndarray:
    """Gradient A x + c of the quadratic at x."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.d:
        raise DataError(f"expected length-{model.d} point, got {x.shape}")
    return x @ model.A + model.c


def covariance_analytic(model: QuadraticModel) -> CovarianceEstimate:
    """Closed form (1/3) A A + c c' of the gradient covariance.

    Valid only for the uniform density on [-1,1]^d, where E[x] = 0 and
    E[x x'] = (1/3) I, so the cross terms vanish.
    """
    C = model.A @ model.A / 3.0 + np.outer(model.c, model.c)
    return CovarianceEstimate(C_hat=C, method="analytic")


def covariance_monte_carlo(model: QuadraticModel, n: int,
                           seed: int) -> CovarianceEstimate:
    """(1/n) sum g(x_i) g(x_i)' over i.i.d. uniform x_i; seeded, deterministic."""
    if n < 1:
        raise DataError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, model.d))
    g = gradient(model, x)
    C = g.T @ g / n
    C = 0.5 * (C + C.T)
    return CovarianceEstimate(C_hat=C, method="monte-carlo", mc_samples=n, seed=seed)


def eigendecompose(cov: CovarianceEstimate) -> ActiveSubspace:
    """Full symmetric eigendecomposition, descending, with a fixed sign convention."""
    C = cov.C_hat
    if not np.all(np.isfinite(C)):
        raise DataError("covariance matrix has non-finite entries")
    lam, W = np.linalg.eigh(C)
    order = np.argsort(lam)[::-1]
    lam, W = lam[order], W[:, order]
    # sign convention: largest-magnitude component of each eigenvector positive
    picks = np.argmax(np.abs(W), axis=0)
    signs = np.sign(W[picks, np.arange(W.shape[1])])
    signs[signs == 0] = 1.0
    W = W * signs

    scale = np.max(np.abs(C)) or 1.0
    residual = np.max(np.abs(C @ W - W * lam))
    if residual > 1e-10 * scale:
        raise NumericalError(
            f"eigendecomposition residual {residual:.3e} exceeds tolerance"
        )
    return ActiveSubspace(eigenvalues=lam, W=W)


def select_dimension(eigenvalues: np.ndarray, max_m: int,
                     gap_threshold: float = GAP_THRESHOLD) -> tuple[int, bool]:
    """Pick m at the largest eigenvalue-ratio gap within 1..max_m.

    Ratios are epsilon-regularized against exact zeros. When the best ratio
    falls below gap_threshold there is no clear spectral gap: m = max_m and
    the result is flagged degenerate.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    d = lam.shape[0]
    if d < 2:
        raise DataError("need at least two eigenvalues to select a dimension")
    if not 1 <= max_m < d:
        raise DataError(f"max_m must satisfy 1 <= max_m < {d}, got {max_m}")
    if np.any(np.diff(lam) > 0):
        raise DataError("eigenvalues must be sorted non-increasing")
    eps = 1e-15 * lam[0]
    ratios = (lam[:max_m] + eps) / (lam[1: max_m + 1] + eps)
    best = int(np.argmax(ratios))
    if ratios[best] < gap_threshold:
        return max_m, True
    return best + 1, False


def finalize_subspace(subspace: ActiveSubspace, max_m: int,
                      gap_threshold: float = GAP_THRESHOLD) -> ActiveSubspace:
    """Return a copy with m chosen from the eigenvalue decay."""
    m, degenerate = select_dimension(subspace.eigenvalues, max_m, gap_threshold)
    return ActiveSubspace(eigenvalues=subspace.eigenvalues, W=subspace.W,
                          m=m, degenerate=degenerate)


def project(subspace: ActiveSubspace, x: np.ndarray) -> np.ndarray:
    """Project x onto the active subspace: W1' x."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != subspace.d:
        raise DataError(f"expected length-{subspace.d} point, got {x.shape}")
    return x @ subspace.W1


def build_summary_plot(table: DesignTable, subspace: ActiveSubspace,
                       qoi_name: str) -> SummaryPlot:
    """One projected point per design, index-aligned with the table."""
    if qoi_name not in table.qoi:
        raise DataError(f"unknown qoi {qoi_name!r}; table has {table.qoi_names}")
    if subspace.m is None:
        raise DataError("subspace dimension m is unset")
    if subspace.m > 2:
        raise DataError(
            f"summary plots support m in {{1, 2}}, got m = {subspace.m}"
        )
    y = project(subspace, table.x)
    return SummaryPlot(
        qoi_name=qoi_name,
        m=subspace.m,
        design_index=np.arange(table.n),
        y=np.atleast_2d(y),
        f=table.qoi[qoi_name],
    )


def _poly_exponents(m: int, degree: int):
    """Total-degree monomial exponent tuples in graded-lexicographic order."""
    exps = []
    for total in range(degree + 1):
        for combo in combinations_with_replacement(range(m), total):
            e = [0] * m
            for v in combo:
                e[v] += 1
            exps.append(tuple(e))
    return exps


def _poly_design_matrix(y: np.ndarray, degree: int) -> np.ndarray:
    m = y.shape[1]
    exps = _poly_exponents(m, degree)
    V = np.ones((y.shape[0], len(exps)))
    for k, e in enumerate(exps):
        for var, power in enumerate(e):
            if power:
                V[:, k] *= y[:, var] ** power
    return V


def fit_ridge_profile(plot: SummaryPlot, degree: int = 2) -> RidgeProfile:
    """Least-squares total-degree polynomial in the projected coordinates."""
    if degree < 0:
        raise DataError("polynomial degree must be >= 0")
    y, f = plot.y, plot.f
    n_coef = len(_poly_exponents(plot.m, degree))
    if y.shape[0] < n_coef:
        raise DataError(
            f"underdetermined profile fit: {y.shape[0]} points for "
            f"{n_coef} coefficients"
        )
    if degree > 0 and np.all(np.ptp(y, axis=0) == 0):
        raise DataError("projected coordinates are all identical; cannot fit")
    V = _poly_design_matrix(y, degree)
    coef, *_ = np.linalg.lstsq(V, f, rcond=None)
    rmse = float(np.sqrt(np.mean((V @ coef - f) ** 2)))
    return RidgeProfile(qoi_name=plot.qoi_name, m=plot.m, degree=degree,
                        coefficients=coef, training_rmse=rmse)


def predict_ridge(profile: RidgeProfile, subspace: ActiveSubspace,
                  x: np.ndarray) -> np.ndarray:
    """Evaluate the profile at the projection of x."""
    if subspace.m != profile.m:
        raise DataError(
            f"profile dimension {profile.m} does not match subspace m={subspace.m}"
        )
    return profile(np.atleast_2d(project(subspace, np.atleast_2d(x))))


def principal_angle(U: np.ndarray, V: np.ndarray) -> float:
    """Largest canonical angle (radians) between the column spans of U and V."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if U.ndim == 2 and U.shape[0] < U.shape[1]:
        U = U.T
    if V.ndim == 2 and V.shape[0] < V.shape[1]:
        V = V.T
    angles = scipy.linalg.subspace_angles(U, V)
    return float(np.max(angles)) if angles.size else 0.0
