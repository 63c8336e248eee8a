"""scikit-learn style wrappers around :func:`classify_pair` and :func:`classify_triple`.

``fit(X, y)`` takes sample locations ``X`` (a uniform grid) and targets
``y`` with one column per function; ``predict(X)`` evaluates the recovered
closed form.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_grid
from .fitting import classify_pair, classify_triple

__all__ = ["PairSolutionClassifier", "TripleSolutionClassifier"]


def _columns(y, k, names):
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[1] != k:
        raise ValueError(f"y must have shape (n, {k}) with columns {names}, got {y.shape}")
    return [y[:, i] for i in range(k)]


def _points(X):
    x = np.asarray(X, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise ValueError(f"X must have shape (n,) or (n, 1), got {np.shape(X)}")
    return x


class PairSolutionClassifier(BaseEstimator):
    """Classify sampled ``(phi, f)`` into a solution case and recover its parameters.

    Parameters
    ----------
    tol : float
        Validation tolerance passed to :func:`meaneq.fitting.classify_pair`.

    Attributes
    ----------
    case_ : PairCase
    params_ : PairParams or None
        Normalized parameters (``a**2 + b**2 = 1``); ``None`` for flat data.
    gamma_, gamma_stderr_, fit_residual_ : float
    fit_ : PairFit
    """

    def __init__(self, tol: float = 1e-6):
        self.tol = tol

    def fit(self, X, y):
        phi_vals, f_vals = _columns(y, 2, ("phi", "f"))
        phi, f = as_grid(X, phi_vals), as_grid(X, f_vals)
        fit = classify_pair(phi, f, self.tol)
        self.fit_ = fit
        self.case_ = fit.case
        self.params_ = fit.params
        self.gamma_ = None if fit.raw_params is None else fit.raw_params.gamma
        self.gamma_stderr_ = fit.gamma_stderr
        self.fit_residual_ = fit.fit_residual
        self._f_grid = f
        return self

    def predict(self, X):
        """Columns ``[phi, f]`` of the recovered model.

        For flat data ``phi`` is the fitted constant and ``f`` is linearly
        interpolated from the training samples.
        """
        check_is_fitted(self, "fit_")
        x = _points(X)
        phi, f = self.fit_.predict(x)
        if f is None:
            f = self._f_grid(np.clip(x, self._f_grid.x0, self._f_grid.x_end))
        return np.column_stack([phi, f])

    def score(self, X, y):
        """Negative sup relative error of ``predict(X)`` against ``y``."""
        pred = self.predict(X)
        y = np.asarray(y, dtype=float)
        return -float(np.max(np.abs(pred - y)) / max(1.0, float(np.max(np.abs(y)))))


class TripleSolutionClassifier(BaseEstimator):
    """Classify sampled ``(G0, ell, H)`` into a row of the triple table.

    ``fit(X, y, g0=(u, values))`` takes ``y`` with columns ``[ell, H]`` on
    the grid ``X`` and the samples of ``G0`` on its own uniform grid ``u``.
    """

    def __init__(self, tol: float = 1e-6):
        self.tol = tol

    def fit(self, X, y, g0=None):
        if g0 is None:
            raise ValueError("g0=(u, values) is required")
        ell_vals, H_vals = _columns(y, 2, ("ell", "H"))
        ell, H = as_grid(X, ell_vals), as_grid(X, H_vals)
        u, g0_vals = g0
        g0_grid = as_grid(u, g0_vals)
        fit = classify_triple(g0_grid, ell, H, self.tol)
        self.fit_ = fit
        self.case_ = fit.case
        self.params_ = fit.params
        self.fit_residual_ = fit.fit_residual
        self.member_ = fit.member
        return self

    def predict(self, X):
        """Columns ``[ell, H]`` of the recovered triple."""
        check_is_fitted(self, "fit_")
        x = _points(X)
        return np.column_stack([self.member_.ell(x), self.member_.H(x)])

    def predict_g0(self, U):
        check_is_fitted(self, "fit_")
        return self.member_.g0(_points(U))
