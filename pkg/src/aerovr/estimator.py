"""scikit-learn style wrapper around the dimension-reduction pipeline.

ActiveSubspaceReducer.fit(X, y) fits the global quadratic surrogate,
forms the analytic gradient covariance, eigendecomposes it, selects the
subspace dimension, and fits the polynomial ridge profile. transform(X)
projects onto the active subspace; predict(X) evaluates the ridge model.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import DesignTable, DomainSpec
from .surrogate import (build_summary_plot, covariance_analytic,
                        eigendecompose, finalize_subspace, fit_quadratic,
                        fit_ridge_profile, predict_ridge, project)


class ActiveSubspaceReducer(TransformerMixin, BaseEstimator):
    """Dimension reduction via the gradient covariance of a quadratic surrogate.

    Parameters
    ----------
    max_m : largest subspace dimension the eigenvalue-gap rule may select.
    gap_threshold : minimum eigenvalue ratio counted as a clear spectral gap.
    degree : total degree of the ridge profile polynomial.
    ridge_regularization : Tikhonov weight for the quadratic fit (0 = plain
        least squares, which requires N >= 1 + d + d(d+1)/2).

    Inputs are expected in the normalized hypercube [-1, 1]^d; use
    `aerovr.dataset.normalize_design` first if they are not.
    """

    def __init__(self, max_m=2, gap_threshold=10.0, degree=2,
                 ridge_regularization=0.0):
        self.max_m = max_m
        self.gap_threshold = gap_threshold
        self.degree = degree
        self.ridge_regularization = ridge_regularization

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        table = DesignTable(DomainSpec.unit(X.shape[1]), X, {"qoi": y})
        self.model_ = fit_quadratic(
            table, "qoi", ridge_regularization=self.ridge_regularization)
        cov = covariance_analytic(self.model_)
        self.subspace_ = finalize_subspace(
            eigendecompose(cov), max_m=self.max_m,
            gap_threshold=self.gap_threshold)
        self.eigenvalues_ = self.subspace_.eigenvalues
        self.components_ = self.subspace_.W1.T
        self.m_ = self.subspace_.m
        self.degenerate_ = self.subspace_.degenerate
        if self.m_ <= 2:
            plot = build_summary_plot(table, self.subspace_, "qoi")
            self.profile_ = fit_ridge_profile(plot, degree=self.degree)
        else:
            self.profile_ = None
        return self

    def transform(self, X):
        check_is_fitted(self, "subspace_")
        X = check_array(X)
        return project(self.subspace_, X)

    def predict(self, X):
        check_is_fitted(self, "profile_")
        if self.profile_ is None:
            raise ValueError("no ridge profile was fit (m > 2)")
        X = check_array(X)
        return predict_ridge(self.profile_, self.subspace_, X)

    def summary_points(self, X, y):
        """Projected coordinates paired with values: the summary-plot payload."""
        check_is_fitted(self, "subspace_")
        X, y = check_X_y(X, y, y_numeric=True)
        return self.transform(X), np.asarray(y, dtype=float)
