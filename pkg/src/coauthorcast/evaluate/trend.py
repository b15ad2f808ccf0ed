"""Observed versus predicted coauthor counts, grouped by the count at the anchor year."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.errors import CoauthorcastError, UndefinedStatistic
from coauthorcast.evaluate._common import evaluation_years, forecast_index, tidy_csv
from coauthorcast.glm import pearson


@dataclass(eq=False)
class TrendReport:
    """Group means per year and the two agreement indices.

    Rows of the grids follow ``groups`` (distinct ``k`` at ``t_X``), columns
    follow ``years``. ``observed``/``predicted`` are mean cumulative coauthor
    counts; ``observed_new``/``predicted_new`` are mean new coauthors in the
    year itself. ``s1`` pairs individuals; ``s2`` compares the two lists
    after sorting each. Either index is NaN when one list is constant.
    """

    years: list[int]
    groups: np.ndarray
    sizes: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray
    observed_new: np.ndarray
    predicted_new: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    n_researchers: int

    def to_csv(self) -> str:
        rows = []
        for c, y in enumerate(self.years):
            for g, k in enumerate(self.groups):
                rows.append((y, k, self.sizes[g], self.observed[g, c], self.predicted[g, c],
                             self.observed_new[g, c], self.predicted_new[g, c]))
        return tidy_csv(("year", "k_anchor", "group_size", "observed_k", "predicted_k",
                         "observed_new", "predicted_new"), rows)

    def indices_csv(self) -> str:
        return tidy_csv(("year", "s1", "s2"), zip(self.years, self.s1, self.s2))

    def summary(self) -> dict:
        return {str(y): {"s1": _num(a), "s2": _num(b)}
                for y, a, b in zip(self.years, self.s1, self.s2)}


def _num(x):
    return None if np.isnan(x) else float(x)


def _safe_pearson(x, y) -> float:
    try:
        return pearson(x, y)
    except UndefinedStatistic:
        return float("nan")


def trend_report(test: DatasetSlice, forecasts, spec: WindowSpec, years=None) -> TrendReport:
    """Compare observed and forecast coauthor counts year by year.

    Individual predictions are the replicate means. Researchers without a
    forecast are left out; years the forecasts do not cover are dropped,
    and an empty overlap is an error.
    """
    by_author = forecast_index(forecasts)
    panel = test.panel
    rows = [r for r, a in enumerate(panel.authors) if a in by_author]
    if not rows:
        raise CoauthorcastError("no test researcher has a forecast")
    fc = [by_author[panel.authors[r]] for r in rows]
    fyears = set(int(y) for y in fc[0].years)
    wanted = evaluation_years(spec, years)
    years = [y for y in wanted if y in fyears and panel.start <= y]
    if not years:
        raise CoauthorcastError(f"forecast years {sorted(fyears)} do not overlap {wanted}")

    rows = np.asarray(rows)
    anchor = spec.t(spec.X)
    k0 = panel.k(anchor)[rows]
    groups, inverse, sizes = np.unique(k0, return_inverse=True, return_counts=True)
    shape = (len(groups), len(years))
    grids = {name: np.zeros(shape) for name in ("obs", "pred", "obs_new", "pred_new")}
    s1 = np.full(len(years), np.nan)
    s2 = np.full(len(years), np.nan)
    for c, y in enumerate(years):
        obs = panel.k(y)[rows].astype(float)
        i = int(np.searchsorted(fc[0].years, y))
        prev = int(fc[0].years[i - 1]) if i > 0 else y
        obs_prev = panel.k(prev)[rows].astype(float)
        pred = np.array([f.mean_k[i] for f in fc])
        pred_prev = np.array([f.mean_k[max(i - 1, 0)] for f in fc])
        for name, vals in (("obs", obs), ("pred", pred), ("obs_new", obs - obs_prev),
                           ("pred_new", pred - pred_prev)):
            grids[name][:, c] = np.bincount(inverse, weights=vals) / sizes
        s1[c] = _safe_pearson(obs, pred)
        s2[c] = _safe_pearson(np.sort(obs), np.sort(pred))
    return TrendReport(years=years, groups=groups, sizes=sizes, observed=grids["obs"],
                       predicted=grids["pred"], observed_new=grids["obs_new"],
                       predicted_new=grids["pred_new"], s1=s1, s2=s2,
                       n_researchers=len(rows))
