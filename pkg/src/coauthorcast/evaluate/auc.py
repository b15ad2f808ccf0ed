"""Accuracy of one-step collaboration-event probabilities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.evaluate._common import evaluation_years, tidy_csv
from coauthorcast.predict import event_probabilities, neglected_tail

STRATUM_CAP = 50
OVERFLOW = f"{STRATUM_CAP + 1}+"


@dataclass(frozen=True)
class AucCounts:
    """``m1`` events called with ``p > 0.5``, ``m2`` non-events with ``p < 0.5``,
    ``m3`` cases with ``p == 0.5`` exactly, out of ``m``."""

    m1: int
    m2: int
    m3: int
    m: int

    @property
    def auc(self) -> float:
        if self.m == 0:
            return float("nan")
        return (self.m1 + self.m2 + 0.5 * self.m3) / self.m

    def __add__(self, other: "AucCounts") -> "AucCounts":
        return AucCounts(self.m1 + other.m1, self.m2 + other.m2,
                         self.m3 + other.m3, self.m + other.m)


def auc_counts(p, events) -> AucCounts:
    p = np.asarray(p, dtype=float)
    events = np.asarray(events, dtype=bool)
    return AucCounts(m1=int(np.sum(events & (p > 0.5))),
                     m2=int(np.sum(~events & (p < 0.5))),
                     m3=int(np.sum(p == 0.5)),
                     m=int(p.size))


@dataclass(eq=False)
class AucReport:
    overall: AucCounts
    by_year: dict[int, AucCounts]
    by_stratum: dict[str, AucCounts]
    authors: list[str] = field(default_factory=list)
    years: np.ndarray = None
    probabilities: np.ndarray = None
    events: np.ndarray = None
    tails: np.ndarray = None   # Poisson mass above M left out of each p

    @property
    def auc(self) -> float:
        return self.overall.auc

    def to_csv(self) -> str:
        rows = [("overall", "all", *_counts(self.overall))]
        rows += [("year", y, *_counts(c)) for y, c in self.by_year.items()]
        rows += [("historical_pubs", s, *_counts(c)) for s, c in self.by_stratum.items()]
        return tidy_csv(("scope", "group", "m1", "m2", "m3", "m", "auc"), rows)

    def probabilities_csv(self) -> str:
        return tidy_csv(("author", "year", "p", "event", "neglected_tail"),
                        zip(self.authors, self.years, self.probabilities,
                            self.events.astype(int), self.tails))

    def summary(self) -> dict:
        return {"auc": self.auc, "m1": self.overall.m1, "m2": self.overall.m2,
                "m3": self.overall.m3, "m": self.overall.m,
                "by_year": {str(y): c.auc for y, c in self.by_year.items()}}


def _counts(c: AucCounts):
    return c.m1, c.m2, c.m3, c.m, c.auc


def stratum_label(i: int) -> str:
    return str(i) if i <= STRATUM_CAP else OVERFLOW


def auc_report(test: DatasetSlice, lam, zeta, hp, spec: WindowSpec, years=None, *,
               printed_pmf: bool = False) -> AucReport:
    """Score the event probability of every test researcher-year.

    The state ``(h, k)`` is the observed one at the previous cutpoint, the
    event is at least one new coauthor in the interval. Researcher-years with
    no publications before the interval have no defined rate and are left out.
    """
    panel = test.panel
    t = spec.cutpoints
    by_year = {}
    strata: dict[str, AucCounts] = {}
    authors, yrs, probs, evs, tails = [], [], [], [], []
    overall = AucCounts(0, 0, 0, 0)
    for y in evaluation_years(spec, years):
        if y not in t or t.index(y) == 0:
            continue
        col = t.index(y)
        h = panel.h(t[col - 1])
        k = panel.k(t[col - 1])
        ok = h >= 1
        p = event_probabilities(h[ok], k[ok], lam, zeta, hp, col, printed_pmf=printed_pmf)
        ev = panel.new_in(t[col - 1], y)[ok] > 0
        counts = auc_counts(p, ev)
        by_year[y] = counts
        overall = overall + counts
        capped = np.minimum(h[ok], STRATUM_CAP + 1)
        for i in np.unique(capped):
            sel = capped == i
            label = stratum_label(int(i))
            strata[label] = strata.get(label, AucCounts(0, 0, 0, 0)) + auc_counts(p[sel], ev[sel])
        authors += [a for a, use in zip(panel.authors, ok) if use]
        yrs.append(np.full(p.size, y))
        probs.append(p)
        evs.append(ev)
        tails.append(np.asarray(neglected_tail(lam.rate(h[ok], col), zeta.M), dtype=float))
    order = sorted(strata, key=lambda s: STRATUM_CAP + 1 if s == OVERFLOW else int(s))
    return AucReport(
        overall=overall, by_year=by_year, by_stratum={s: strata[s] for s in order},
        authors=authors,
        years=np.concatenate(yrs) if yrs else np.zeros(0, dtype=int),
        probabilities=np.concatenate(probs) if probs else np.zeros(0),
        events=np.concatenate(evs) if evs else np.zeros(0, dtype=bool),
        tails=np.concatenate(tails) if tails else np.zeros(0),
    )
