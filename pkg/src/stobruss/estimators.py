"""scikit-learn style wrappers around the functional API.

These make the growth-rate fit, the dispersion relation and the modal
projection usable inside sklearn pipelines and grid searches. The
functional modules stay the primary interface.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .analysis import fit_slopes
from .exceptions import InvalidArgumentError
from .model import BrusselatorParams, linearize
from .spectral import EigenMode


def _times_column(X):
    X = np.asarray(X, dtype=float)
    return X.reshape(-1, 1) if X.ndim == 1 else X


class LyapunovRegressor(RegressorMixin, BaseEstimator):
    """Least-squares growth rate of log-norm series.

    ``X`` holds the sample times (shape ``(n,)`` or ``(n, 1)``), ``y`` the
    log-norms, one column per realisation. Only samples inside
    ``[fit_start, fit_end]`` enter the fit; the defaults are ``0.3 t_max``
    and ``t_max``.
    """

    def __init__(self, fit_start=None, fit_end=None):
        self.fit_start = fit_start
        self.fit_end = fit_end

    def fit(self, X, y):
        X, y = check_X_y(_times_column(X), y, multi_output=True, y_numeric=True)
        if X.shape[1] != 1:
            raise InvalidArgumentError(f"X must be a single time column, got {X.shape[1]} columns")
        t = X[:, 0]
        t0 = 0.3 * t.max() if self.fit_start is None else float(self.fit_start)
        t1 = t.max() if self.fit_end is None else float(self.fit_end)
        slope, intercept, stderr, n = fit_slopes(t, y, (t0, t1))
        self.slope_ = slope
        self.intercept_ = intercept
        self.stderr_ = stderr
        self.n_points_ = n
        self.fit_window_ = (t0, t1)
        self.n_features_in_ = 1
        return self

    @property
    def lyapunov_(self):
        """Mean slope over realisations."""
        check_is_fitted(self, "slope_")
        return float(np.mean(self.slope_))

    def predict(self, X):
        check_is_fitted(self, "slope_")
        t = check_array(_times_column(X))[:, 0]
        return self.intercept_ + np.multiply.outer(t, self.slope_)


class DispersionTransformer(TransformerMixin, BaseEstimator):
    """Map eigenvalues ``mu`` to ``(w, z, lambda_re_max)`` of ``E = A_mu - B^2/2``.

    ``w`` is the trace and ``z`` the determinant, so the eigenvalues are the
    roots of ``lam**2 - w lam + z``.
    """

    def __init__(self, A=1.0, B=1.8, d_u=5e-5, d_v=2e-3, sigma_u=0.0, sigma_v=0.0):
        self.A = A
        self.B = B
        self.d_u = d_u
        self.d_v = d_v
        self.sigma_u = sigma_u
        self.sigma_v = sigma_v

    def fit(self, X=None, y=None):
        self.params_ = BrusselatorParams(self.A, self.B, self.d_u, self.d_v)
        if X is not None:
            check_array(_times_column(X))
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        mu = check_array(_times_column(X))
        if mu.shape[1] != 1:
            raise InvalidArgumentError("X must be a single column of eigenvalues mu")
        mu = mu[:, 0]
        if np.any(mu < 0):
            raise InvalidArgumentError("eigenvalues mu must be >= 0")
        co = linearize(self.params_)
        e11 = co.a - self.d_u * mu - 0.5 * self.sigma_u**2
        e22 = co.d - self.d_v * mu - 0.5 * self.sigma_v**2
        w = e11 + e22
        z = e11 * e22 - co.b * co.c
        # largest real part of (w +- sqrt(w^2 - 4z)) / 2
        h = 0.5 * (e11 - e22)
        q = h * h + co.b * co.c
        re = 0.5 * w + np.sqrt(np.maximum(q, 0.0))
        return np.column_stack([w, z, re])

    def get_feature_names_out(self, input_features=None):
        return np.array(["w", "z", "lambda_re_max"], dtype=object)


class ModeProjector(TransformerMixin, BaseEstimator):
    """Cosine-mode coefficients of fields sampled on a cell-centred grid.

    Rows of ``X`` are fields on ``N`` cells of ``(0, L)``; ``transform``
    returns the first ``n_modes`` midpoint-rule coefficients. With
    ``n_modes = N`` the map is orthogonal up to ``dx`` (Parseval) and
    ``inverse_transform`` reconstructs exactly.
    """

    def __init__(self, L=1.0, n_modes=None):
        self.L = L
        self.n_modes = n_modes

    def fit(self, X, y=None):
        X = check_array(X)
        N = X.shape[1]
        K = N if self.n_modes is None else int(self.n_modes)
        if not 1 <= K <= N:
            raise InvalidArgumentError(f"n_modes must lie in [1, {N}], got {self.n_modes!r}")
        if not self.L > 0:
            raise InvalidArgumentError(f"L must be > 0, got {self.L!r}")
        self.dx_ = self.L / N
        x = (np.arange(N) + 0.5) * self.dx_
        self.components_ = np.stack([EigenMode(k, 0.0, self.L).phi(x) for k in range(1, K + 1)])
        self.mu_ = np.array([((k - 1) * math.pi / self.L) ** 2 for k in range(1, K + 1)])
        self.n_features_in_ = N
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidArgumentError(f"expected {self.n_features_in_} cells, got {X.shape[1]}")
        return self.dx_ * X @ self.components_.T

    def inverse_transform(self, C):
        check_is_fitted(self, "components_")
        C = check_array(C)
        if C.shape[1] != self.components_.shape[0]:
            raise InvalidArgumentError(f"expected {self.components_.shape[0]} coefficients, got {C.shape[1]}")
        return C @ self.components_


__all__ = ["LyapunovRegressor", "DispersionTransformer", "ModeProjector"]
