"""scikit-learn style wrappers around the estimators.

``X`` is a 1-D series (or an ``(n, 1)`` column).  ``fit`` stores the
threshold and Hill estimate; ``predict`` / ``transform`` evaluate the cdf of
``Theta_lag`` at the given ``x`` values.  The first and last ``padding``
observations only serve as neighbours (``padding=None`` uses
``s_n + |lag|``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .estimators import (Absolute, EstimatorConfig, Quantile, Series, cdf_curve, hill,
                         threshold)
from .validation import check_values


class HillEstimator(BaseEstimator):
    """Tail index from exceedances of a quantile or absolute threshold."""

    def __init__(self, quantile: float = 0.95, threshold: float | None = None):
        self.quantile = quantile
        self.threshold = threshold

    def _rule(self):
        return Quantile(self.quantile) if self.threshold is None else Absolute(self.threshold)

    def fit(self, X, y=None):
        series = Series(check_values(X, "X"))
        self.threshold_ = threshold(series, self._rule())
        self.alpha_ = hill(series, self.threshold_)
        self.n_exceedances_ = int(np.sum(np.abs(series.core) > self.threshold_))
        return self


class SpectralTailCDF(BaseEstimator, TransformerMixin):
    """Estimate ``P{Theta_lag <= x}`` with one of the four estimators.

    Parameters
    ----------
    method : {"projection_hat", "projection", "forward", "backward"}
    lag : int
    s_n : int
        Block half-width of the projection estimators.
    quantile : float
        Threshold level when ``threshold`` is None.
    threshold : float, optional
        Absolute threshold.
    alpha : float, optional
        Known tail index, required by ``method="projection"``.
    padding : int, optional
        Neighbour-only observations at each end of ``X``.
    """

    def __init__(self, method="projection_hat", lag=1, s_n=30, quantile=0.95,
                 threshold=None, alpha=None, padding=None):
        self.method = method
        self.lag = lag
        self.s_n = s_n
        self.quantile = quantile
        self.threshold = threshold
        self.alpha = alpha
        self.padding = padding

    def _config(self) -> EstimatorConfig:
        rule = Quantile(self.quantile) if self.threshold is None else Absolute(self.threshold)
        return EstimatorConfig(rule, self.s_n, self.lag, self.alpha)

    def fit(self, X, y=None):
        cfg = self._config()
        pad = cfg.padding if self.padding is None else int(self.padding)
        self.series_ = Series.padded(check_values(X, "X"), pad)
        self.threshold_ = threshold(self.series_, cfg)
        self.alpha_ = hill(self.series_, self.threshold_)
        return self

    def predict(self, x) -> np.ndarray:
        """cdf estimates at the sorted points ``x``."""
        check_is_fitted(self, "series_")
        report = cdf_curve(self.series_, self._config(), np.asarray(x, dtype=float).ravel(),
                           (self.method,))
        return report.values[self.method]

    def transform(self, X) -> np.ndarray:
        return self.predict(X)[:, None]
