"""Serial correlation of yearly new-coauthor counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.errors import UndefinedStatistic
from coauthorcast.evaluate._common import tidy_csv


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelation ``r_1 .. r_max_lag``.

    ``r_l = sum_{t<=T-l} (y_t - m)(y_{t+l} - m) / sum_t (y_t - m)^2`` with
    ``m`` the series mean.

    Raises
    ------
    UndefinedStatistic
        If the series is constant.
    """
    y = np.asarray(series, dtype=float)
    T = y.size
    if T < 2:
        raise ValueError("need at least two observations")
    if not 1 <= max_lag < T:
        raise ValueError(f"max_lag must be in [1, {T - 1}]")
    # Shifting by a sample value first keeps a large offset out of the mean's rounding.
    y = y - y[0]
    d = y - y.mean()
    denom = float(d @ d)
    if denom == 0.0:
        raise UndefinedStatistic("autocorrelation of a constant series")
    return np.array([float(d[:T - l] @ d[l:]) / denom for l in range(1, max_lag + 1)])


@dataclass(eq=False)
class AutocorrelationReport:
    """Autocorrelation of each group's mean yearly new-coauthor series.

    Groups share ``k`` at the anchor year; ``weights`` are group proportions
    among the groups whose series is not constant. ``pooled`` is the
    weighted mean over those groups.
    """

    groups: np.ndarray
    sizes: np.ndarray
    coefficients: np.ndarray   # (groups, max_lag); NaN for constant series
    weights: np.ndarray
    pooled: np.ndarray

    def to_csv(self) -> str:
        rows = []
        for g, k in enumerate(self.groups):
            for lag, r in enumerate(self.coefficients[g], start=1):
                rows.append((k, self.sizes[g], self.weights[g], lag, r))
        return tidy_csv(("k_anchor", "group_size", "weight", "lag", "r"), rows)


def grouped_autocorrelation(data: DatasetSlice, spec: WindowSpec, max_lag: int = 3,
                            years=None) -> AutocorrelationReport:
    """Group researchers by ``k`` at ``t_X`` and correlate each group's mean
    new-coauthor series over ``years`` (default ``t_{X+1} .. t_Z``)."""
    panel = data.panel
    t = spec.cutpoints
    if years is None:
        years = t[spec.X + 1:spec.Z + 1]
    years = list(years)
    k0 = panel.k(t[spec.X])
    groups, inv, sizes = np.unique(k0, return_inverse=True, return_counts=True)
    series = np.empty((len(groups), len(years)))
    for c, y in enumerate(years):
        prev = t[t.index(y) - 1]
        series[:, c] = np.bincount(inv, weights=panel.new_in(prev, y)) / sizes
    coef = np.full((len(groups), max_lag), np.nan)
    for g in range(len(groups)):
        try:
            coef[g] = autocorrelation(series[g], max_lag)
        except UndefinedStatistic:
            pass
    ok = ~np.isnan(coef[:, 0])
    weights = np.where(ok, sizes, 0).astype(float)
    if weights.sum() > 0:
        weights /= weights.sum()
        pooled = weights[ok] @ coef[ok]
    else:
        pooled = np.full(max_lag, np.nan)
    return AutocorrelationReport(groups, sizes, coef, weights, pooled)
