"""Do new-coauthor counts look Poisson once researchers are grouped?"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.evaluate._common import tidy_csv
from coauthorcast.glm import ks_test_poisson
from coauthorcast.rng import derive_seed

ANNUAL_PUBS = ("annual_pubs",)
ANNUAL_PUBS_AND_COAUTHORS = ("annual_pubs", "historical_coauthors")


@dataclass(frozen=True)
class GroupTest:
    year: int
    m: int
    l: int | None          # prior coauthor count; None when not grouped by it
    size: int
    statistic: float       # NaN for insufficient groups
    p_value: float

    @property
    def tested(self) -> bool:
        return not np.isnan(self.p_value)


@dataclass(eq=False)
class PoissonScan:
    group_by: tuple[str, ...]
    min_size: int
    groups: list[GroupTest]
    largest_group: dict[int, int]   # year -> size of its largest group
    alpha: float = 0.05

    @property
    def tested(self) -> list[GroupTest]:
        return [g for g in self.groups if g.tested]

    @property
    def insufficient(self) -> list[GroupTest]:
        return [g for g in self.groups if not g.tested]

    def rejection_rate(self) -> float:
        tested = self.tested
        if not tested:
            return float("nan")
        return sum(g.p_value <= self.alpha for g in tested) / len(tested)

    def to_csv(self) -> str:
        return tidy_csv(("year", "m", "l", "size", "ks_statistic", "p_value", "status"),
                        ((g.year, g.m, g.l, g.size, g.statistic, g.p_value,
                          "tested" if g.tested else "insufficient") for g in self.groups))

    def largest_csv(self) -> str:
        return tidy_csv(("year", "largest_group"), self.largest_group.items())

    def summary(self) -> dict:
        return {"group_by": list(self.group_by), "tested": len(self.tested),
                "insufficient": len(self.insufficient),
                "rejection_rate": self.rejection_rate()}


def poisson_character_scan(data: DatasetSlice, spec: WindowSpec,
                           group_by=ANNUAL_PUBS, *, years=None, min_size: int = 20,
                           n_boot: int = 1000, seed: int = 0,
                           alpha: float = 0.05) -> PoissonScan:
    """One-sample Poisson KS test of yearly new-coauthor counts per group.

    Researchers are grouped by their publications ``m`` in the year, and
    optionally also by their coauthor count ``l`` before it. Groups smaller
    than ``min_size`` are listed but not tested. ``years`` defaults to the
    training intervals. Each group's bootstrap has its own seed, derived
    from ``seed`` and the group key.
    """
    group_by = tuple(group_by)
    if group_by not in (ANNUAL_PUBS, ANNUAL_PUBS_AND_COAUTHORS):
        raise ValueError(f"unsupported grouping {group_by}")
    by_coauthors = len(group_by) == 2
    panel = data.panel
    t = spec.cutpoints
    if years is None:
        years = t[1:spec.L + 1]
    out = []
    largest = {}
    for y in years:
        col = t.index(y)
        m = panel.pubs_in(t[col - 1], y)
        dk = panel.new_in(t[col - 1], y)
        active = m >= 1
        keys = np.column_stack([m, panel.k(t[col - 1]) if by_coauthors else np.zeros_like(m)])
        keys = keys[active]
        dk = dk[active]
        if keys.size == 0:
            largest[y] = 0
            continue
        uniq, inv, sizes = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inv = inv.ravel()
        largest[y] = int(sizes.max())
        for g, (gm, gl) in enumerate(uniq):
            sample = dk[inv == g]
            l_val = int(gl) if by_coauthors else None
            if sample.size < min_size:
                out.append(GroupTest(y, int(gm), l_val, int(sample.size), np.nan, np.nan))
                continue
            res = ks_test_poisson(sample, n_boot=n_boot,
                                  seed=derive_seed(seed, "ks", y, int(gm), int(gl)))
            out.append(GroupTest(y, int(gm), l_val, int(sample.size), res.statistic, res.p_value))
    return PoissonScan(group_by=group_by, min_size=min_size, groups=out,
                       largest_group=largest, alpha=alpha)
