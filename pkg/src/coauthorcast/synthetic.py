"""Corpora drawn from the model's own generative process.

Each synthetic ("focal") author enters in some year with at least one
publication, then each later year draws ``dh ~ Poisson(lam(h, year))``
publications and, when ``dh > 0``, ``dk ~ Poisson(upsilon k^tau zeta(min(dh, M), year))``
brand-new coauthors. Coauthor identifiers are never shared between focal
authors, so the latent counts are recoverable exactly from the corpus.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from coauthorcast.corpus import Publication
from coauthorcast.hyperopt import HyperParams
from coauthorcast.predict import modified_zeta
from coauthorcast.rng import substream


@dataclass(frozen=True)
class PowerTimeSurface:
    """``scale * exp(time_slope * (year - origin)) * x ** power``."""

    scale: float
    time_slope: float = 0.0
    power: float = 0.0
    origin: int = 0

    def __call__(self, x, year):
        x = np.asarray(x, dtype=float)
        return self.scale * np.exp(self.time_slope * (year - self.origin)) * x ** self.power


@dataclass(frozen=True, eq=False)
class MatrixSurface:
    """Explicit rate table; row ``x`` (clamped to the table) and column ``year - first_year``."""

    values: np.ndarray
    first_year: int

    def __call__(self, x, year):
        x = np.clip(np.asarray(x), 1, self.values.shape[0])
        return self.values[x - 1, year - self.first_year]


@dataclass(frozen=True)
class GenerativeSpec:
    n_authors: int
    first_year: int
    last_year: int
    publication_rate: Callable
    coauthor_rate: Callable
    hyperparams: HyperParams = HyperParams(tau=0.0, upsilon=1.0)
    entry_first: int | None = None
    entry_last: int | None = None
    entry_growth: float = 0.0
    entry_extra_pubs: float = 0.5
    max_annual: int = 12
    padding: bool = True
    seed: int = 0
    prefix: str = "s"

    def __post_init__(self):
        if self.last_year - self.first_year < 1:
            raise ValueError("year range must span at least two years")
        if self.n_authors < 1:
            raise ValueError("n_authors must be >= 1")

    def author_id(self, index: int) -> str:
        return f"{self.prefix}{index:06d}"


@dataclass
class GroundTruth:
    """Latent yearly increments per focal author: rows of ``(year, dh, dk)``."""

    increments: dict[str, list[tuple[int, int, int]]] = field(default_factory=dict)

    @property
    def authors(self) -> list[str]:
        return list(self.increments)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("author,year,dh,dk\n")
        for a, rows in self.increments.items():
            for y, dh, dk in rows:
                out.write(f"{a},{y},{dh},{dk}\n")
        return out.getvalue()


def generate(spec: GenerativeSpec) -> tuple[list[Publication], GroundTruth]:
    """Draw a corpus and the latent counts that produced it."""
    lo = spec.first_year if spec.entry_first is None else spec.entry_first
    hi = spec.last_year if spec.entry_last is None else spec.entry_last
    entry_years = np.arange(lo, hi + 1)
    weights = np.exp(spec.entry_growth * (entry_years - lo))
    weights /= weights.sum()
    hp = spec.hyperparams
    pubs: list[Publication] = []
    truth = GroundTruth()
    for idx in range(spec.n_authors):
        author = spec.author_id(idx)
        rng = substream(spec.seed, "synthetic", idx)
        mat = substream(spec.seed, "synthetic-records", idx)
        entry = int(rng.choice(entry_years, p=weights))
        h = k = 0
        rows = []
        coauthors: list[str] = []
        for year in range(entry, spec.last_year + 1):
            if year == entry:
                dh = 1 + int(rng.poisson(spec.entry_extra_pubs))
            else:
                dh = int(rng.poisson(float(spec.publication_rate(h, year))))
            dk = 0
            if dh > 0:
                base = float(spec.coauthor_rate(min(dh, spec.max_annual), year))
                dk = int(rng.poisson(modified_zeta(base, k, hp)))
            rows.append((year, dh, dk))
            if dh:
                pubs.extend(_materialize(author, year, dh, dk, coauthors, mat, spec.padding))
            h += dh
            k += dk
        truth.increments[author] = rows
    pubs.sort(key=lambda p: p.year)
    return pubs, truth


def _materialize(author, year, dh, dk, coauthors, rng, padding):
    fresh = [f"{author}.c{len(coauthors) + n}" for n in range(dk)]
    coauthors.extend(fresh)
    lists = [[author] for _ in range(dh)]
    for name, slot in zip(fresh, rng.integers(0, dh, size=dk)):
        lists[slot].append(name)
    if padding and coauthors:
        for names in lists:
            if len(names) == 1:
                names.append(coauthors[int(rng.integers(0, len(coauthors)))])
    return [Publication(f"{author}/{year}/{n}", year, tuple(names))
            for n, names in enumerate(lists)]
