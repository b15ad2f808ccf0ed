"""Genetic search for the cumulative-advantage hyperparameters.

The fitness of ``(tau, upsilon)`` is the total absolute error between the
adjusted coauthor rate and the observed number of new coauthors, summed
over validation researchers and years ``t_{U+1} .. t_V``.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.errors import ConfigError
from coauthorcast.predict import modified_zeta
from coauthorcast.training import ZetaMatrix


@dataclass(frozen=True)
class HyperParams:
    """Exponent ``tau`` and scale ``upsilon`` of the cumulative-advantage adjustment."""

    tau: float
    upsilon: float

    def to_dict(self) -> dict:
        return {"tau": self.tau, "upsilon": self.upsilon}


@dataclass(frozen=True)
class Interval:
    low: float
    high: float
    closed_low: bool = True
    closed_high: bool = True

    def __post_init__(self):
        if self.high < self.low or (self.high == self.low
                                    and not (self.closed_low and self.closed_high)):
            raise ConfigError(f"empty interval {self}")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo = x >= self.low if self.closed_low else x > self.low
        hi = x <= self.high if self.closed_high else x < self.high
        return lo & hi

    def __str__(self):
        return (("[" if self.closed_low else "(") + f"{self.low!r}, {self.high!r}"
                + ("]" if self.closed_high else ")"))

    @classmethod
    def parse(cls, text: str) -> "Interval":
        m = re.fullmatch(r"\s*([\[(])\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*([\])])\s*", text)
        if not m:
            raise ConfigError(f"cannot parse interval {text!r}; expected e.g. [0.6, 1.0] or (0, 0.4]")
        return cls(float(m.group(2)), float(m.group(3)), m.group(1) == "[", m.group(4) == "]")


@dataclass(frozen=True)
class GAConfig:
    """Genetic-algorithm settings.

    ``L0``/``L1`` bound the two genes, ``L2`` is the mutation step range.
    With ``upsilon_in_L0`` (the default) ``upsilon`` is searched in ``L0``
    and ``tau`` in ``L1``.
    """

    n0: int = 400
    n1: int | None = None
    n2: int | None = None
    n3: int = 500
    L0: Interval = Interval(0.6, 1.0)
    L1: Interval = Interval(0.0, 0.4, closed_low=False)
    L2: Interval = Interval(-0.01, 0.01)
    upsilon_in_L0: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n1 is None:
            object.__setattr__(self, "n1", math.ceil(0.6 * self.n0))
        if self.n2 is None:
            object.__setattr__(self, "n2", math.ceil(0.3 * self.n0))
        if self.n0 < 2 or self.n1 < 0 or self.n2 < 0 or self.n3 < 0:
            raise ConfigError("need n0 >= 2 and non-negative n1, n2, n3")

    @property
    def tau_interval(self) -> Interval:
        return self.L1 if self.upsilon_in_L0 else self.L0

    @property
    def upsilon_interval(self) -> Interval:
        return self.L0 if self.upsilon_in_L0 else self.L1


@dataclass(frozen=True, eq=False)
class ValidationTerms:
    """Validation researcher-years reduced to distinct ``(m, col, k_prev, dk)``
    tuples with multiplicities.

    Years without publications score ``|0 - dk|`` and are folded into
    ``constant``; years with more than ``M`` publications are skipped.
    """

    m: np.ndarray
    col: np.ndarray
    k_prev: np.ndarray
    dk: np.ndarray
    weight: np.ndarray
    constant: float
    n_terms: int
    skipped: int

    def evaluate(self, taus, upsilons, zeta: ZetaMatrix) -> np.ndarray:
        """Fitness of each ``(taus[p], upsilons[p])`` pair."""
        taus = np.asarray(taus, dtype=float)
        ups = np.asarray(upsilons, dtype=float)
        base = zeta.values[self.m - 1, self.col - 1]
        uk, inv = np.unique(self.k_prev, return_inverse=True)
        logk = np.log(np.where(uk > 0, uk, 1.0))
        boost = np.where(uk[None, :] > 0, np.exp(taus[:, None] * logk[None, :]), 1.0)[:, inv]
        err = np.abs(ups[:, None] * boost * base[None, :] - self.dk[None, :])
        return err @ self.weight + self.constant


def prepare_validation(validation: DatasetSlice, spec: WindowSpec) -> ValidationTerms:
    if len(validation) == 0:
        raise ConfigError("the validation slice is empty")
    panel = validation.panel
    t = spec.cutpoints
    rows = []
    constant = 0.0
    skipped = 0
    n_terms = 0
    for col in range(spec.U + 1, spec.V + 1):
        dh = panel.pubs_in(t[col - 1], t[col])
        dk = panel.new_in(t[col - 1], t[col])
        kp = panel.k(t[col - 1])
        idle = dh == 0
        constant += float(np.abs(dk[idle]).sum())
        over = dh > spec.M
        skipped += int(over.sum())
        use = ~idle & ~over
        n_terms += int(use.sum()) + int(idle.sum())
        rows.append(np.column_stack([dh[use], np.full(use.sum(), col), kp[use], dk[use]]))
    stacked = np.vstack(rows) if rows else np.zeros((0, 4), dtype=np.int64)
    uniq, counts = np.unique(stacked, axis=0, return_counts=True)
    return ValidationTerms(
        m=uniq[:, 0], col=uniq[:, 1], k_prev=uniq[:, 2], dk=uniq[:, 3].astype(float),
        weight=counts.astype(float), constant=constant, n_terms=n_terms, skipped=skipped,
    )


def fitness(hp: HyperParams, validation: DatasetSlice, zeta: ZetaMatrix,
            spec: WindowSpec) -> float:
    """Total absolute error of the adjusted rates on the validation slice (lower is better)."""
    if len(validation) == 0:
        raise ConfigError("the validation slice is empty")
    panel = validation.panel
    t = spec.cutpoints
    terms = []
    for col in range(spec.U + 1, spec.V + 1):
        dh = panel.pubs_in(t[col - 1], t[col])
        dk = panel.new_in(t[col - 1], t[col])
        kp = panel.k(t[col - 1])
        for s in range(len(panel)):
            if dh[s] == 0:
                terms.append(abs(0 - int(dk[s])))
            elif dh[s] <= spec.M:
                rate = modified_zeta(zeta.values[dh[s] - 1, col - 1], int(kp[s]), hp)
                terms.append(abs(rate - int(dk[s])))
    return math.fsum(terms)


@dataclass
class GAResult:
    best: HyperParams
    best_fitness: float
    trace: list[tuple[int, float, float, float]] = field(default_factory=list)
    skipped_terms: int = 0

    def trace_csv(self) -> str:
        out = io.StringIO()
        out.write("generation,best_fitness,best_tau,best_upsilon\n")
        for g, f, tau, ups in self.trace:
            out.write(f"{g},{f!r},{tau!r},{ups!r}\n")
        return out.getvalue()


def run_ga(config: GAConfig, validation: DatasetSlice | ValidationTerms, zeta: ZetaMatrix,
           spec: WindowSpec | None = None) -> GAResult:
    """Real-coded genetic search over ``(tau, upsilon)``.

    Each generation adds ``n1`` arithmetic crossovers of uniformly chosen
    parents and ``n2`` mutants (both genes shifted by independent draws from
    ``L2``), then keeps the ``n0`` fittest chromosomes that lie inside the
    search box. Survivors keep their fitness, so the best fitness never
    increases. All draws come from one ``PCG64`` stream seeded by
    ``config.seed``.
    """
    terms = validation if isinstance(validation, ValidationTerms) else \
        prepare_validation(validation, spec)
    rng = np.random.default_rng(config.seed)
    ti, ui = config.tau_interval, config.upsilon_interval
    pop = np.column_stack([
        rng.uniform(ti.low, ti.high, size=config.n0),
        rng.uniform(ui.low, ui.high, size=config.n0),
    ])
    inside = ti.contains(pop[:, 0]) & ui.contains(pop[:, 1])
    pop = pop[inside]
    fit = terms.evaluate(pop[:, 0], pop[:, 1], zeta)
    order = np.argsort(fit, kind="stable")
    pop, fit = pop[order], fit[order]
    trace = [(0, float(fit[0]), float(pop[0, 0]), float(pop[0, 1]))]

    for gen in range(1, config.n3 + 1):
        parents = rng.integers(0, len(pop), size=(config.n1, 2))
        r = rng.random(config.n1)[:, None]
        children = r * pop[parents[:, 0]] + (1 - r) * pop[parents[:, 1]]
        pool = np.vstack([pop, children])
        picks = rng.integers(0, len(pool), size=config.n2)
        steps = rng.uniform(config.L2.low, config.L2.high, size=(config.n2, 2))
        mutants = pool[picks] + steps
        new = np.vstack([children, mutants])
        new_fit = terms.evaluate(new[:, 0], new[:, 1], zeta)
        allpop = np.vstack([pop, new])
        allfit = np.concatenate([fit, new_fit])
        ok = ti.contains(allpop[:, 0]) & ui.contains(allpop[:, 1])
        idx = np.flatnonzero(ok)
        idx = idx[np.argsort(allfit[idx], kind="stable")][:config.n0]
        pop, fit = allpop[idx], allfit[idx]
        trace.append((gen, float(fit[0]), float(pop[0, 0]), float(pop[0, 1])))

    return GAResult(best=HyperParams(float(pop[0, 0]), float(pop[0, 1])),
                    best_fitness=float(fit[0]), trace=trace, skipped_terms=terms.skipped)
