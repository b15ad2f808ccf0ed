"""Assemble the full publication-rate and coauthor-rate matrices.

The publication-rate matrix ``lam`` (``I x J``) is filled in four regions:

* ``i <= K, j <= L``: per-row time fits to the empirical means (observed-fit);
* ``i <= K, j > L``: the same row fits extrapolated in time (row-extrapolated);
* ``i > K, j <= L``: per-column power-law fits in ``i`` (column-extrapolated);
* ``i > K, j > L``: mean of a time fit through the column-extrapolated values
  and a power-law fit through the row-fitted values (averaged).

The coauthor-rate matrix ``zeta`` (``M x J``) has one time fit per row.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field

import numpy as np

from coauthorcast.corpus import WindowSpec
from coauthorcast.errors import FitError, TrainingError
from coauthorcast.glm import OLS_ON_LOGS, LogLinearFit, fit_log_time, fit_loglog
from coauthorcast.matrices import GroupMeans, _read_grid

log = logging.getLogger(__name__)

OBSERVED, ROW_EXTRAPOLATED, COLUMN_EXTRAPOLATED, AVERAGED = range(4)
PROVENANCE = ("observed-fit", "row-extrapolated", "column-extrapolated", "averaged")


@dataclass(eq=False)
class LambdaMatrix:
    """Fitted expected publications per interval.

    ``values[i - 1, j - 1]`` is the rate for researchers with ``i`` historical
    publications in interval ``j``. ``row_fits[i - 1]`` holds the time fit
    ``(alpha_i, beta_i)`` and ``col_fits[j - 1]`` the power-law fit
    ``(mu_j, nu_j)``; entries are None where Algorithm-1 never fits them.
    """

    values: np.ndarray
    row_fits: list = field(default_factory=list)
    col_fits: list = field(default_factory=list)
    provenance: np.ndarray | None = None

    @property
    def I(self) -> int:
        return self.values.shape[0]

    @property
    def J(self) -> int:
        return self.values.shape[1]

    def rate(self, h, col):
        """Rate for historical count ``h`` (clamped to ``1..I``) in 1-based interval ``col``."""
        h = np.clip(np.asarray(h), 1, self.I)
        return self.values[h - 1, col - 1]

    def to_csv(self) -> str:
        return _grid_csv("i/j", self.values)

    def provenance_csv(self) -> str:
        out = io.StringIO()
        out.write("i/j," + ",".join(str(j) for j in range(1, self.J + 1)) + "\n")
        for i in range(self.I):
            out.write(f"{i + 1}," + ",".join(PROVENANCE[c] for c in self.provenance[i]) + "\n")
        return out.getvalue()

    def coefficients_csv(self) -> str:
        return _coef_csv([("row", i + 1, f) for i, f in enumerate(self.row_fits)]
                         + [("column", j + 1, f) for j, f in enumerate(self.col_fits)])

    @classmethod
    def from_csv(cls, text: str) -> "LambdaMatrix":
        return cls(values=_read_grid(text, float))


@dataclass(eq=False)
class ZetaMatrix:
    """Fitted expected new coauthors per interval, before the cumulative-advantage
    adjustment. ``values[m - 1, j - 1]`` is the rate for ``m`` publications in
    interval ``j``; ``significance[m - 1]`` is the p-value of that row's time slope."""

    values: np.ndarray
    fits: list = field(default_factory=list)
    significance: np.ndarray | None = None
    fallback_rows: tuple[int, ...] = ()

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def J(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        return _grid_csv("m/j", self.values)

    def coefficients_csv(self) -> str:
        return _coef_csv([("row", m + 1, f) for m, f in enumerate(self.fits)])

    @classmethod
    def from_csv(cls, text: str) -> "ZetaMatrix":
        return cls(values=_read_grid(text, float))


def _grid_csv(label, grid):
    out = io.StringIO()
    out.write(label + "," + ",".join(str(j) for j in range(1, grid.shape[1] + 1)) + "\n")
    for r in range(grid.shape[0]):
        out.write(f"{r + 1}," + ",".join(repr(float(v)) for v in grid[r]) + "\n")
    return out.getvalue()


def _coef_csv(rows):
    out = io.StringIO()
    out.write("kind,index,intercept,slope,slope_se,slope_p_value,n_points,method\n")
    for kind, idx, f in rows:
        if f is None:
            continue
        out.write(f"{kind},{idx},{f.intercept!r},{f.slope!r},{f.slope_se!r},"
                  f"{f.slope_p_value!r},{f.n_points},{f.method}\n")
    return out.getvalue()


def fit_lambda(eta: GroupMeans, spec: WindowSpec, *, method: str = OLS_ON_LOGS,
               lenient: bool = False) -> LambdaMatrix:
    """Extend the ``K x L`` empirical means to an ``I x J`` rate matrix.

    Observed means are fitted with group-size weights; the pseudo-observations
    of the extrapolation steps get unit weights and ordinary least squares.

    In lenient mode a row ``i <= K`` without two positive means takes its
    values from the column power laws (and a time fit through them) instead
    of aborting; likewise a column ``j <= L`` is fitted through the row
    models.
    """
    I, J, K, L = spec.I, spec.J, spec.K, spec.L
    if eta.values.shape != (K, L):
        raise TrainingError(f"eta has shape {eta.values.shape}, expected {(K, L)}")
    times = np.asarray(spec.cutpoints[1:], dtype=float)
    origin = float(times[0])
    values = np.full((I, J), np.nan)
    prov = np.full((I, J), -1, dtype=np.int8)
    row_fits: list[LogLinearFit | None] = [None] * I
    col_fits: list[LogLinearFit | None] = [None] * J
    need_columns = K < I

    bad_rows = []
    for i in range(1, K + 1):
        try:
            fit = fit_log_time(eta.values[i - 1], times[:L], eta.counts[i - 1],
                               method=method, origin=origin)
        except FitError as exc:
            if not lenient:
                raise TrainingError(f"row i={i} of eta cannot be fitted: {exc}") from exc
            bad_rows.append(i)
            continue
        row_fits[i - 1] = fit
        values[i - 1] = fit.predict(times)
        prov[i - 1, :L] = OBSERVED
        prov[i - 1, L:] = ROW_EXTRAPOLATED

    good_rows = [i for i in range(1, K + 1) if row_fits[i - 1] is not None]
    ranks = np.arange(1, K + 1, dtype=float)
    high = np.arange(K + 1, I + 1, dtype=float)

    if need_columns or bad_rows:
        for j in range(1, L + 1):
            try:
                fit = fit_loglog(ranks, eta.values[:, j - 1], eta.counts[:, j - 1])
            except FitError as exc:
                if not lenient:
                    raise TrainingError(f"column j={j} of eta cannot be fitted: {exc}") from exc
                fit = _loglog_through_rows(row_fits, good_rows, times[j - 1], j)
            col_fits[j - 1] = fit
            if need_columns:
                values[K:, j - 1] = fit.predict(high)
                prov[K:, j - 1] = COLUMN_EXTRAPOLATED

    for i in bad_rows:
        log.info("eta row i=%d has too few positive means; using the column fits", i)
        pseudo = np.array([col_fits[j - 1].predict(i) for j in range(1, L + 1)])
        fit = fit_log_time(pseudo, times[:L], method=OLS_ON_LOGS, origin=origin)
        row_fits[i - 1] = fit
        values[i - 1, :L] = pseudo
        values[i - 1, L:] = fit.predict(times[L:])
        prov[i - 1, :L] = COLUMN_EXTRAPOLATED
        prov[i - 1, L:] = ROW_EXTRAPOLATED

    if need_columns:
        for i in range(K + 1, I + 1):
            row_fits[i - 1] = fit_log_time(values[i - 1, :L], times[:L],
                                           method=OLS_ON_LOGS, origin=origin)
        for j in range(L + 1, J + 1):
            col_fits[j - 1] = _loglog_through_rows(row_fits, range(1, K + 1), times[j - 1], j)
        for i in range(K + 1, I + 1):
            for j in range(L + 1, J + 1):
                values[i - 1, j - 1] = (row_fits[i - 1].predict(times[j - 1])
                                        + col_fits[j - 1].predict(i)) / 2
        prov[K:, L:] = AVERAGED

    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise TrainingError("fitted publication rates are not all finite and positive")
    return LambdaMatrix(values=values, row_fits=row_fits, col_fits=col_fits, provenance=prov)


def _loglog_through_rows(row_fits, rows, t, j):
    rows = list(rows)
    if len(rows) < 2:
        raise TrainingError(f"column j={j}: fewer than two fitted rows to extrapolate from")
    pseudo = np.array([row_fits[i - 1].predict(t) for i in rows])
    return fit_loglog(np.asarray(rows, dtype=float), pseudo)


def fit_zeta(xi: GroupMeans, spec: WindowSpec, *, method: str = OLS_ON_LOGS,
             lenient: bool = False) -> ZetaMatrix:
    """One time fit per annual-publication row, extended to all ``J`` intervals.

    In lenient mode a row without two usable means is rebuilt from per-column
    power laws in ``m`` fitted to the usable rows, then time-fitted.
    """
    M, J, L = spec.M, spec.J, spec.L
    if xi.values.shape != (M, L):
        raise TrainingError(f"xi has shape {xi.values.shape}, expected {(M, L)}")
    times = np.asarray(spec.cutpoints[1:], dtype=float)
    origin = float(times[0])
    values = np.full((M, J), np.nan)
    fits: list[LogLinearFit | None] = [None] * M
    significance = np.full(M, np.nan)
    bad = []
    for m in range(1, M + 1):
        try:
            fit = fit_log_time(xi.values[m - 1], times[:L], xi.counts[m - 1],
                               method=method, origin=origin)
        except FitError as exc:
            if not lenient:
                raise TrainingError(f"row m={m} of xi cannot be fitted: {exc}") from exc
            bad.append(m)
            continue
        fits[m - 1] = fit
        significance[m - 1] = fit.slope_p_value
        values[m - 1] = fit.predict(times)

    if bad:
        ms = np.arange(1, M + 1, dtype=float)
        pseudo = np.full((M, L), np.nan)
        for j in range(1, L + 1):
            try:
                col = fit_loglog(ms, xi.values[:, j - 1], xi.counts[:, j - 1])
            except FitError:
                continue
            pseudo[:, j - 1] = col.predict(ms)
        for m in bad:
            log.info("xi row m=%d has too few usable means; using per-column power laws", m)
            try:
                fit = fit_log_time(pseudo[m - 1], times[:L], method=OLS_ON_LOGS, origin=origin)
            except FitError as exc:
                raise TrainingError(f"row m={m} of xi cannot be rebuilt: {exc}") from exc
            fits[m - 1] = fit
            values[m - 1] = fit.predict(times)

    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise TrainingError("fitted coauthor rates are not all finite and positive")
    return ZetaMatrix(values=values, fits=fits, significance=significance,
                      fallback_rows=tuple(bad))
