"""Observed versus simulated coauthor distributions, year by year."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.errors import CoauthorcastError
from coauthorcast.evaluate._common import evaluation_years, forecast_index, tidy_csv
from coauthorcast.glm import ks_test_two_sample

SINGLE = "single"
POOLED = "pooled"


@dataclass(eq=False)
class YearDistribution:
    year: int
    observed: np.ndarray    # histogram over k = 0 .. len - 1
    predicted: np.ndarray
    statistic: float
    p_value: float


@dataclass(eq=False)
class DistributionReport:
    mode: str
    years: list[YearDistribution]
    alpha: float = 0.05

    @property
    def p_values(self) -> np.ndarray:
        return np.array([d.p_value for d in self.years])

    @property
    def rejections(self) -> int:
        return int(np.sum(self.p_values <= self.alpha))

    def to_csv(self) -> str:
        rows = []
        for d in self.years:
            size = max(len(d.observed), len(d.predicted))
            obs = np.pad(d.observed, (0, size - len(d.observed)))
            pred = np.pad(d.predicted, (0, size - len(d.predicted)))
            for k in np.flatnonzero((obs > 0) | (pred > 0)):
                rows.append((d.year, k, obs[k], pred[k]))
        return tidy_csv(("year", "k", "observed_count", "predicted_count"), rows)

    def tests_csv(self) -> str:
        return tidy_csv(("year", "ks_statistic", "p_value"),
                        ((d.year, d.statistic, d.p_value) for d in self.years))

    def summary(self) -> dict:
        return {"mode": self.mode, "alpha": self.alpha, "years": len(self.years),
                "rejections": self.rejections,
                "p_values": {str(d.year): d.p_value for d in self.years}}


def distribution_report(test: DatasetSlice, forecasts, spec: WindowSpec, years=None, *,
                        mode: str = SINGLE, replicate: int = 0,
                        alpha: float = 0.05) -> DistributionReport:
    """Two-sample KS comparison of ``{k_s(y)}`` against simulated values.

    ``mode="single"`` uses one replicate per researcher, which keeps the two
    samples the same size; ``mode="pooled"`` uses every replicate.
    """
    if mode not in (SINGLE, POOLED):
        raise ValueError(f"mode must be {SINGLE!r} or {POOLED!r}")
    by_author = forecast_index(forecasts)
    panel = test.panel
    rows = [r for r, a in enumerate(panel.authors) if a in by_author]
    if not rows:
        raise CoauthorcastError("no test researcher has a forecast")
    fc = [by_author[panel.authors[r]] for r in rows]
    fyears = set(int(y) for y in fc[0].years)
    out = []
    for y in evaluation_years(spec, years):
        if y not in fyears:
            continue
        i = int(np.searchsorted(fc[0].years, y))
        obs = panel.k(y)[rows]
        if mode == SINGLE:
            pred = np.array([f.k[replicate, i] for f in fc])
        else:
            pred = np.concatenate([f.k[:, i] for f in fc])
        res = ks_test_two_sample(obs, pred)
        out.append(YearDistribution(y, np.bincount(obs), np.bincount(pred),
                                    res.statistic, res.p_value))
    if not out:
        raise CoauthorcastError("forecast years do not overlap the evaluation years")
    return DistributionReport(mode=mode, years=out, alpha=alpha)
