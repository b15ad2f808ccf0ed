"""Yearly descriptive diagnostics of cumulative advantage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.errors import UndefinedStatistic
from coauthorcast.evaluate._common import tidy_csv
from coauthorcast.glm import fit_loglog, spearman


@dataclass(eq=False)
class YearDiagnostics:
    year: int
    active: int                    # researchers with at least one publication so far
    single_pub_share: float        # share of those with exactly one publication
    coauthor_advantage: tuple      # (prior k, group size, mean new coauthors)
    publication_advantage: tuple   # (prior h, group size, mean publications)
    spearman_r: float
    spearman_p: float


@dataclass(eq=False)
class AppendixReport:
    years: list[YearDiagnostics]

    def proportion_csv(self) -> str:
        return tidy_csv(("year", "active", "single_pub_share", "spearman_r", "spearman_p"),
                        ((d.year, d.active, d.single_pub_share, d.spearman_r, d.spearman_p)
                         for d in self.years))

    def advantage_csv(self) -> str:
        rows = []
        for d in self.years:
            for kind, (keys, sizes, means) in (("coauthors", d.coauthor_advantage),
                                               ("publications", d.publication_advantage)):
                rows += [(d.year, kind, x, n, v) for x, n, v in zip(keys, sizes, means)]
        return tidy_csv(("year", "grouped_by", "prior_count", "group_size", "mean_gain"), rows)


def _grouped_mean(keys, values):
    uniq, inv, sizes = np.unique(keys, return_inverse=True, return_counts=True)
    return uniq, sizes, np.bincount(inv, weights=values) / sizes


def advantage_slope(keys, sizes, means, min_size: int = 1) -> float:
    """Log-log slope of mean gain on prior count, over groups with a positive
    prior count and at least ``min_size`` members."""
    keys = np.asarray(keys, dtype=float)
    use = (keys > 0) & (np.asarray(sizes) >= min_size)
    return fit_loglog(keys[use], np.asarray(means)[use], np.asarray(sizes)[use]).slope


def appendix_diagnostics(data: DatasetSlice, spec: WindowSpec, years=None) -> AppendixReport:
    """Per year: share of single-publication researchers, mean gains grouped by
    prior coauthor and publication counts, and the rank correlation between
    cumulative publications and cumulative coauthors.

    Only researchers with a publication on or before the year are counted.
    """
    panel = data.panel
    t = spec.cutpoints
    if years is None:
        years = t[1:]
    out = []
    for y in years:
        prev = t[t.index(y) - 1]
        h, k = panel.h(y), panel.k(y)
        active = h >= 1
        hp, kp = panel.h(prev), panel.k(prev)
        before = hp >= 1
        try:
            r, p = spearman(h[active], k[active])
        except (UndefinedStatistic, ValueError):
            r, p = float("nan"), float("nan")
        out.append(YearDiagnostics(
            year=y,
            active=int(active.sum()),
            single_pub_share=float(np.mean(h[active] == 1)) if active.any() else float("nan"),
            coauthor_advantage=_grouped_mean(kp[before], panel.new_in(prev, y)[before]),
            publication_advantage=_grouped_mean(hp[before], panel.pubs_in(prev, y)[before]),
            spearman_r=r, spearman_p=p,
        ))
    return AppendixReport(out)

