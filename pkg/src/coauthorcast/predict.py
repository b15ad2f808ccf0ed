"""Rate adjustment for cumulative advantage, Monte Carlo forecasts, and
one-step collaboration-event probabilities."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import special

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.errors import CoauthorcastError
from coauthorcast.rng import substream
from coauthorcast.training import LambdaMatrix, ZetaMatrix

if TYPE_CHECKING:
    from coauthorcast.hyperopt import HyperParams


def modified_zeta(zeta, k_prev, hp: HyperParams):
    """Coauthor rate adjusted for the researcher's prior coauthor count.

    ``upsilon * zeta`` when ``k_prev == 0``, otherwise
    ``upsilon * k_prev ** tau * zeta``. Vectorised over array inputs.
    """
    k = np.asarray(k_prev, dtype=float)
    with np.errstate(divide="ignore"):
        boost = np.where(k > 0, np.power(np.where(k > 0, k, 1.0), hp.tau), 1.0)
    out = hp.upsilon * boost * np.asarray(zeta, dtype=float)
    return float(out) if out.ndim == 0 else out


@dataclass(eq=False)
class Forecast:
    """Simulated trajectories for one researcher.

    ``h`` and ``k`` are ``(replicates, len(years))`` integer arrays; column 0
    is the observed state at ``t_X``. A forecast reloaded from the summary
    CSVs keeps only the sample replicate, while ``replicates`` still reports
    how many were simulated.
    """

    author: str
    years: np.ndarray
    h: np.ndarray
    k: np.ndarray
    replicates: int
    seed: int
    mean_h: np.ndarray = None
    mean_k: np.ndarray = None
    q05_k: np.ndarray = None
    q95_k: np.ndarray = None

    def __post_init__(self):
        if self.mean_h is None:
            self.mean_h = self.h.mean(axis=0)
        if self.mean_k is None:
            self.mean_k = self.k.mean(axis=0)
        if self.q05_k is None:
            self.q05_k, self.q95_k = np.quantile(self.k, [0.05, 0.95], axis=0)

    @property
    def start(self) -> tuple[int, int]:
        return int(self.h[0, 0]), int(self.k[0, 0])

    def point(self, year: int) -> tuple[float, float]:
        idx = int(np.searchsorted(self.years, year))
        return float(self.mean_h[idx]), float(self.mean_k[idx])

    def sample(self, replicate: int = 0) -> tuple[np.ndarray, np.ndarray]:
        return self.h[replicate], self.k[replicate]


@dataclass
class SimulationResult:
    forecasts: list[Forecast]
    h_overflow: int = 0       # replicate-years looked up past row I
    r_clamped: int = 0        # replicate-years with more than M publications
    skipped: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.forecasts)

    def __len__(self):
        return len(self.forecasts)


def _simulate_one(author, h0, k0, lam, zeta, hp, cols, replicates, seed):
    rng = substream(seed, "predict", author)
    n = len(cols) + 1
    H = np.empty((replicates, n), dtype=np.int64)
    K = np.empty((replicates, n), dtype=np.int64)
    h = np.full(replicates, h0, dtype=np.int64)
    k = np.full(replicates, k0, dtype=np.int64)
    H[:, 0], K[:, 0] = h, k
    overflow = clamped = 0
    I, M = lam.I, zeta.M
    for c, col in enumerate(cols, start=1):
        over = h > I
        overflow += int(over.sum())
        rate = lam.values[np.minimum(h, I) - 1, col - 1]
        r = rng.poisson(rate)
        clamped += int((r > M).sum())
        row = np.clip(r, 1, M)
        zt = np.where(r > 0, modified_zeta(zeta.values[row - 1, col - 1], k, hp), 0.0)
        u = rng.poisson(zt)
        h = h + r
        k = k + u
        H[:, c], K[:, c] = h, k
    return H, K, overflow, clamped


def simulate(test: DatasetSlice, lam: LambdaMatrix, zeta: ZetaMatrix, hp: HyperParams,
             spec: WindowSpec, replicates: int = 100, seed: int = 0, *,
             threads: int = 1) -> SimulationResult:
    """Simulate ``(h, k)`` from ``t_X`` to ``t_Z`` for every test researcher.

    Each year draws ``r ~ Poisson(lam[h, l])`` publications and, if ``r > 0``,
    ``u ~ Poisson(modified_zeta(zeta[min(r, M), l], k))`` new coauthors.
    Every researcher has its own random substream keyed by ``(seed, author)``,
    so results do not depend on ``threads`` or on who else is simulated.
    Researchers with no publications by ``t_X`` are skipped.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    t = spec.cutpoints
    panel = test.panel
    h0 = panel.h(t[spec.X])
    k0 = panel.k(t[spec.X])
    cols = list(range(spec.X + 1, spec.Z + 1))
    years = np.asarray(t[spec.X:spec.Z + 1])
    result = SimulationResult(forecasts=[])
    jobs = []
    for row, author in enumerate(panel.authors):
        if h0[row] < 1:
            result.skipped.append(author)
            continue
        jobs.append((author, int(h0[row]), int(k0[row])))

    def run(job):
        return _simulate_one(job[0], job[1], job[2], lam, zeta, hp, cols, replicates, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(run, jobs))
    else:
        outs = [run(j) for j in jobs]
    for (author, _, _), (H, K, over, clamp) in zip(jobs, outs):
        result.forecasts.append(Forecast(author, years, H, K, replicates, seed))
        result.h_overflow += over
        result.r_clamped += clamp
    return result


class ProbabilityRangeError(CoauthorcastError, ArithmeticError):
    pass


def _pmf(x, lam, printed_pmf):
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if printed_pmf:
        # the numerator exactly as typeset: x ** lam
        return np.exp(lam * np.log(x) - special.gammaln(x + 1) - lam)
    with np.errstate(divide="ignore"):
        return np.exp(x * np.log(lam) - special.gammaln(x + 1) - lam)


def event_probabilities(h_prev, k_prev, lam: LambdaMatrix, zeta: ZetaMatrix,
                        hp: HyperParams, col: int, *, printed_pmf: bool = False,
                        eps: float = 1e-9) -> np.ndarray:
    """Vectorised probability of at least one new coauthor in interval ``col``.

    ``p = 1 - e^-lam - sum_{x=1..M} Pois(x; lam) e^-zt_x``, truncated at ``M``.
    With ``printed_pmf`` the Poisson numerator is read as ``x ** lam``; that
    form is not a probability law and its values are returned unchecked.
    """
    h_prev = np.atleast_1d(np.asarray(h_prev))
    k_prev = np.atleast_1d(np.asarray(k_prev))
    if np.any(h_prev < 1):
        raise ValueError("historical publication count must be >= 1")
    rate = lam.rate(h_prev, col)
    xs = np.arange(1, zeta.M + 1)
    pmf = _pmf(xs[None, :], rate[:, None], printed_pmf)
    zt = modified_zeta(zeta.values[:, col - 1][None, :], k_prev[:, None], hp)
    p = 1.0 - np.exp(-rate) - np.sum(pmf * np.exp(-zt), axis=1)
    if printed_pmf:
        return p
    if np.any(p < -eps) or np.any(p > 1 + eps):
        raise ProbabilityRangeError("event probability left [0, 1]")
    return np.clip(p, 0.0, 1.0)


def event_probability(h_prev: int, k_prev: int, lam: LambdaMatrix, zeta: ZetaMatrix,
                      hp: HyperParams, col: int, *, printed_pmf: bool = False) -> float:
    """Probability that a researcher with state ``(h_prev, k_prev)`` gains a new
    coauthor in interval ``col``."""
    return float(event_probabilities([h_prev], [k_prev], lam, zeta, hp, col,
                                     printed_pmf=printed_pmf)[0])


def neglected_tail(rate, M: int):
    """Poisson mass above ``M`` that the truncated event sum leaves out.

    Returns a float for a scalar ``rate`` and an array otherwise.
    """
    out = special.pdtrc(M, rate)
    return float(out) if np.ndim(out) == 0 else out


def truncation_bound(rate: float, M: int) -> float:
    """``e^-rate rate^(M+1) / (M+1)!``, the leading term of the neglected tail."""
    return math.exp(-rate + (M + 1) * math.log(rate) - math.lgamma(M + 2))
