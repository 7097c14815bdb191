"""scikit-learn style wrappers.

The chart is a hyperparameter and ``X`` is an array of parameter points
``(u, v)`` with shape ``(n_samples, 2)``.  This lets the Laplacian fit and
the curvature features drop into pipelines, ``clone`` and ``get_params``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .classify import fit_arrays
from .geometry import SAMPLE_ERRORS, analyze_point

__all__ = ["DiagonalLaplacianFit", "CurvatureTransformer"]


def _check_points(X):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != 2:
        raise ValueError(f"X must have 2 columns (u, v), got {X.shape[1]}")
    return X


def _analyze(chart, X):
    """Analyze each row; excluded rows come back as ``None``."""
    out = []
    for u, v in X:
        try:
            out.append(analyze_point(chart, float(u), float(v)))
        except SAMPLE_ERRORS:
            out.append(None)
    return out


class DiagonalLaplacianFit(TransformerMixin, BaseEstimator):
    """Estimate a constant diagonal ``A`` with ``Delta X = A X``.

    Parameters
    ----------
    chart : Chart
        Surface patch to analyze.

    Attributes
    ----------
    a_ : ndarray, shape (ambient_dim,)
        Fitted eigenvalue per coordinate; NaN where the coordinate carries
        too little mass to be determined.
    residual_ : float
        Relative least-squares misfit of the fit.
    coordinate_mass_ : ndarray, shape (ambient_dim,)
    n_excluded_ : int
        Rows skipped because the patch is degenerate there.
    """

    def __init__(self, chart=None):
        self.chart = chart

    def fit(self, X, y=None):
        X = _check_points(X)
        if self.chart is None:
            raise ValueError("chart must be set before fitting")
        samples = [s for s in _analyze(self.chart, X) if s is not None]
        if not samples:
            raise ValueError("no regular points in X")
        pos = np.array([s.position for s in samples])
        lap = np.array([s.laplacian for s in samples])
        fit = fit_arrays(pos, lap, len(X), len(X) - len(samples))
        self.a_ = np.array([np.nan if a is None else a for a in fit.a])
        self.residual_ = fit.residual
        self.coordinate_mass_ = np.array(fit.coordinate_mass)
        self.n_excluded_ = fit.samples_excluded
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        """Laplacian of the coordinate functions at each point (NaN if excluded)."""
        check_is_fitted(self, "a_")
        X = _check_points(X)
        return self._rows(X, lambda s: s.laplacian)

    def predict(self, X):
        """``A X`` at each point using the fitted diagonal."""
        check_is_fitted(self, "a_")
        X = _check_points(X)
        return self._rows(X, lambda s: self.a_ * s.position)

    def score(self, X, y=None):
        """Negative relative misfit of ``A X`` against ``Delta X`` on ``X``."""
        lap = self.transform(X)
        pred = self.predict(X)
        ok = ~np.isnan(lap).any(axis=1)
        cols = ~np.isnan(self.a_)
        diff = lap[ok][:, cols] - pred[ok][:, cols]
        return -float(np.linalg.norm(diff) / max(np.linalg.norm(lap[ok][:, cols]), 1e-300))

    def _rows(self, X, getter):
        dim = self.chart.ambient_dim
        out = np.full((len(X), dim), np.nan)
        for i, s in enumerate(_analyze(self.chart, X)):
            if s is not None:
                out[i] = getter(s)
        return out


class CurvatureTransformer(TransformerMixin, BaseEstimator):
    """Map parameter points to ``[K, |H|]`` features.  Stateless."""

    def __init__(self, chart=None):
        self.chart = chart

    def fit(self, X, y=None):
        _check_points(X)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_points(X)
        out = np.full((len(X), 2), np.nan)
        for i, s in enumerate(_analyze(self.chart, X)):
            if s is not None:
                out[i] = (s.curvature.K, s.curvature.H_norm)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["K", "H_norm"], dtype=object)
