"""Per-researcher yearly series of publications and first-time coauthors."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from coauthorcast.corpus.records import IngestReport, Publication


@dataclass(frozen=True)
class AuthorTimeline:
    """Yearly counts for one researcher.

    ``new_coauthors_by_year[y]`` counts coauthors whose first joint
    publication with this author falls in year ``y``. Only years with a
    non-zero count are stored.
    """

    author: str
    pubs_by_year: Mapping[int, int]
    new_coauthors_by_year: Mapping[int, int]
    first_year: int

    def h(self, t: int) -> int:
        """Cumulative publications up to and including year ``t``."""
        return sum(c for y, c in self.pubs_by_year.items() if y <= t)

    def k(self, t: int) -> int:
        """Cumulative distinct coauthors up to and including year ``t``."""
        return sum(c for y, c in self.new_coauthors_by_year.items() if y <= t)

    def pubs_between(self, start: int, end: int) -> int:
        """Publications in the closed year range ``[start, end]``."""
        return sum(c for y, c in self.pubs_by_year.items() if start <= y <= end)

    def new_between(self, start: int, end: int) -> int:
        return sum(c for y, c in self.new_coauthors_by_year.items() if start <= y <= end)


def build_timelines(
    pubs: Iterable[Publication],
    window: tuple[int, int],
    *,
    authors: Iterable[str] | None = None,
    report: IngestReport | None = None,
) -> dict[str, AuthorTimeline]:
    """Build timelines for every author (or only ``authors``) over ``window``.

    Publications outside the closed year window are excluded and counted in
    ``report.out_of_window``. Coauthor novelty is judged against the whole
    in-window history, so a coauthor is counted once, in the first year the
    pair co-publishes. The result is ordered by author identifier.
    """
    start, end = window
    if start > end:
        raise ValueError(f"empty window {window}")
    focus = None if authors is None else set(authors)
    in_window = []
    dropped = 0
    for p in pubs:
        if start <= p.year <= end:
            in_window.append(p)
        else:
            dropped += 1
    if report is not None:
        report.out_of_window += dropped
    in_window.sort(key=lambda p: p.year)

    pubs_by = defaultdict(lambda: defaultdict(int))
    new_by = defaultdict(lambda: defaultdict(int))
    seen: dict[str, set] = defaultdict(set)
    for p in in_window:
        for a in p.authors:
            if focus is not None and a not in focus:
                continue
            pubs_by[a][p.year] += 1
            known = seen[a]
            for b in p.authors:
                if b != a and b not in known:
                    known.add(b)
                    new_by[a][p.year] += 1

    out = {}
    for a in sorted(pubs_by):
        yearly = dict(sorted(pubs_by[a].items()))
        out[a] = AuthorTimeline(
            author=a,
            pubs_by_year=yearly,
            new_coauthors_by_year=dict(sorted(new_by[a].items())),
            first_year=next(iter(yearly)),
        )
    return out


class Panel:
    """Dense (researcher x year) arrays for a set of timelines.

    Cumulative lookups accept any year: years before ``start`` give zero and
    years after ``end`` give the final total.
    """

    def __init__(self, authors: list[str], start: int, pubs: np.ndarray, new: np.ndarray):
        self.authors = list(authors)
        self.start = int(start)
        self.pubs = np.asarray(pubs, dtype=np.int64)
        self.new = np.asarray(new, dtype=np.int64)
        n = len(self.authors)
        self.end = self.start + self.pubs.shape[1] - 1
        zero = np.zeros((n, 1), dtype=np.int64)
        self._cum_pubs = np.hstack([zero, np.cumsum(self.pubs, axis=1)])
        self._cum_new = np.hstack([zero, np.cumsum(self.new, axis=1)])

    @classmethod
    def from_timelines(cls, timelines: Iterable[AuthorTimeline], start: int, end: int) -> "Panel":
        timelines = list(timelines)
        width = end - start + 1
        pubs = np.zeros((len(timelines), width), dtype=np.int64)
        new = np.zeros_like(pubs)
        for row, tl in enumerate(timelines):
            for y, c in tl.pubs_by_year.items():
                if start <= y <= end:
                    pubs[row, y - start] = c
            for y, c in tl.new_coauthors_by_year.items():
                if start <= y <= end:
                    new[row, y - start] = c
        return cls([tl.author for tl in timelines], start, pubs, new)

    def __len__(self):
        return len(self.authors)

    def _col(self, t: int) -> int:
        return int(min(max(t - self.start + 1, 0), self.pubs.shape[1]))

    def h(self, t: int) -> np.ndarray:
        """Cumulative publications in ``[start, t]`` for every researcher."""
        return self._cum_pubs[:, self._col(t)]

    def k(self, t: int) -> np.ndarray:
        """Cumulative distinct coauthors in ``[start, t]``."""
        return self._cum_new[:, self._col(t)]

    def pubs_in(self, a: int, b: int) -> np.ndarray:
        """Publications in the half-open interval ``(a, b]``."""
        return self.h(b) - self.h(a)

    def new_in(self, a: int, b: int) -> np.ndarray:
        return self.k(b) - self.k(a)

    def annual(self, year: int) -> np.ndarray:
        return self.pubs_in(year - 1, year)

    def max_annual(self, first: int, last: int) -> np.ndarray:
        """Largest single-year publication count within ``[first, last]``."""
        lo = max(first, self.start) - self.start
        hi = min(last, self.end) - self.start + 1
        if hi <= lo:
            return np.zeros(len(self), dtype=np.int64)
        return self.pubs[:, lo:hi].max(axis=1)

    def subset(self, rows) -> "Panel":
        rows = np.asarray(rows)
        return Panel([self.authors[i] for i in rows], self.start, self.pubs[rows], self.new[rows])
