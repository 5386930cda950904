"""scikit-learn style wrappers.

``fit`` computes the mean ergodic projections once; ``transform`` maps each
row of ``X`` to its stacked components, shape ``(n_samples, n_ops, dim)``;
``inverse_transform`` sums them back.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_vector
from .decomp import (DEFAULT_TOL, GridFunction, OperatorFamily, decompose_grid_function,
                     decompose_oracle, decompose_vector)
from .ergodic import mean_ergodic_projection, parse_mean, power_bounded_verdict
from .exceptions import HypothesisViolationError, InvalidInputError, PerdecError


def _check_rows(X, width):
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != width:
        raise InvalidInputError(f"expected rows of length {width}, got shape {X.shape}")
    return np.stack([check_vector(row, width) for row in X]) if len(X) else X


class PeriodicDecomposer(TransformerMixin, BaseEstimator):
    """Decompose vectors along the fixed spaces of commuting operators.

    Parameters
    ----------
    operators : sequence of (dim, dim) arrays
        The commuting family ``T_1, ..., T_n``.
    tol : float
        Relative acceptance tolerance.
    mean : {"exact", "algebraic", "cesaro:N"}
        How the mean ergodic projections are computed.
    method : {"inclusion_exclusion", "oracle"}
    """

    def __init__(self, operators=None, tol=DEFAULT_TOL, mean="exact",
                 method="inclusion_exclusion"):
        self.operators = operators
        self.tol = tol
        self.mean = mean
        self.method = method

    def fit(self, X=None, y=None):
        if self.operators is None:
            raise InvalidInputError("operators must be given")
        if self.method not in ("inclusion_exclusion", "oracle"):
            raise InvalidInputError(f"unknown method {self.method!r}")
        self.family_ = OperatorFamily(list(self.operators))
        kind, _ = parse_mean(self.mean)
        reports = []
        for j, T in enumerate(self.family_.ops):
            if kind == "algebraic" and not power_bounded_verdict(T).bounded:
                raise HypothesisViolationError(f"operator {j} is not power-bounded")
            reports.append(mean_ergodic_projection(T, method=self.mean))
        self.projection_reports_ = reports
        self.projections_ = [r.P for r in reports]
        self.n_features_in_ = self.family_.dim
        if X is not None:
            _check_rows(X, self.n_features_in_)
        return self

    def decompose(self, x):
        check_is_fitted(self, "projections_")
        if self.method == "oracle":
            return decompose_oracle(self.family_, x, tol=self.tol)
        return decompose_vector(self.family_, x, tol=self.tol, projections=self.projections_)

    def transform(self, X):
        check_is_fitted(self, "projections_")
        X = _check_rows(X, self.n_features_in_)
        out = np.empty((len(X), self.family_.n, self.n_features_in_), dtype=np.complex128)
        for i, row in enumerate(X):
            out[i] = np.stack(self.decompose(row).components)
        return out

    def inverse_transform(self, C):
        return np.asarray(C).sum(axis=1)

    def score(self, X, y=None):
        """Fraction of rows that decompose within tolerance."""
        X = _check_rows(X, self.n_features_in_)
        ok = 0
        for row in X:
            try:
                ok += self.decompose(row).accepted
            except PerdecError:
                pass
        return ok / max(len(X), 1)


class GridPeriodicDecomposer(TransformerMixin, BaseEstimator):
    """Split sampled functions on ``Z_N`` into ``a_j``-periodic parts."""

    def __init__(self, shifts=(1,), tol=DEFAULT_TOL, mean="exact"):
        self.shifts = shifts
        self.tol = tol
        self.mean = mean

    def fit(self, X, y=None):
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] < 1:
            raise InvalidInputError("expected a 2-d array of samples")
        parse_mean(self.mean)
        self.n_features_in_ = X.shape[1]
        self.shifts_ = [int(a) % self.n_features_in_ for a in self.shifts]
        return self

    def decompose(self, values):
        check_is_fitted(self, "shifts_")
        f = GridFunction(self.n_features_in_, values, self.shifts_)
        return decompose_grid_function(f, tol=self.tol, mean=self.mean)

    def transform(self, X):
        check_is_fitted(self, "shifts_")
        X = _check_rows(X, self.n_features_in_)
        out = np.empty((len(X), len(self.shifts_), self.n_features_in_), dtype=np.complex128)
        for i, row in enumerate(X):
            out[i] = np.stack(self.decompose(row).components)
        return out

    def inverse_transform(self, C):
        return np.asarray(C).sum(axis=1)
