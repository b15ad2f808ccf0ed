"""Statistical kernels: log-linear rate fits, coefficient tests, KS tests, correlations."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from coauthorcast.errors import FitError, UndefinedStatistic

log = logging.getLogger(__name__)

OLS_ON_LOGS = "ols_on_logs"
POISSON_IRLS = "poisson_irls"
METHODS = (OLS_ON_LOGS, POISSON_IRLS)


@dataclass(frozen=True)
class LogLinearFit:
    """Coefficients of ``log y = intercept + slope * x``.

    For time fits ``x = t - origin``; for log-log fits ``x = log i`` and
    ``origin`` is unused.

    Attributes
    ----------
    intercept, slope : float
        Fitted coefficients.
    slope_se : float
        Standard error of the slope (``inf`` when there are no residual
        degrees of freedom).
    slope_p_value : float
        Wald chi-square (1 df) p-value for ``slope == 0``.
    n_points : int
        Points used in the fit.
    method : str
        ``"ols_on_logs"`` or ``"poisson_irls"``.
    regressor : str
        ``"time"`` or ``"log"``.
    origin : float
        Time origin for ``regressor == "time"``.
    n_dropped : int
        Points dropped because the mean was zero or undefined.
    iterations : int
        IRLS iterations (0 for OLS).
    deviance_trace : tuple of float
        Poisson deviance after each accepted IRLS step.
    """

    intercept: float
    slope: float
    slope_se: float
    slope_p_value: float
    n_points: int
    method: str = OLS_ON_LOGS
    regressor: str = "time"
    origin: float = 0.0
    n_dropped: int = 0
    iterations: int = 0
    deviance_trace: tuple[float, ...] = ()

    def predict(self, x):
        """Fitted rate at time ``x`` (time fits) or at group index ``x`` (log-log fits)."""
        x = np.asarray(x, dtype=float)
        if self.regressor == "log":
            return np.exp(self.intercept) * x ** self.slope
        return np.exp(self.intercept + self.slope * (x - self.origin))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["deviance_trace"] = list(self.deviance_trace)
        return d


def _wald_p(slope, se):
    if se == 0.0:
        return 1.0 if slope == 0.0 or abs(slope) < 1e-12 else 0.0
    if not math.isfinite(se):
        return 1.0
    return float(stats.chi2.sf((slope / se) ** 2, df=1))


def _usable(x, y, w, need_positive):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("regressor and response must be 1-D arrays of equal length")
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float)
    if w.shape != y.shape:
        raise ValueError("weights must match the response length")
    ok = np.isfinite(y) & np.isfinite(x) & (w > 0)
    if need_positive:
        ok &= y > 0
    else:
        ok &= y >= 0
    return x[ok], y[ok], w[ok], int((~ok).sum())


def _wls(x, z, w):
    """Weighted least squares of ``z`` on ``[1, x]``; returns (coef, cov)."""
    X = np.column_stack([np.ones_like(x), x])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], z * sw, rcond=None)
    n = len(z)
    xtwx = X.T @ (X * w[:, None])
    try:
        inv = np.linalg.inv(xtwx)
    except np.linalg.LinAlgError:
        raise FitError("regressor has no spread; slope is not identifiable") from None
    if n > 2:
        resid = z - X @ coef
        sigma2 = float(np.sum(w * resid**2) / (n - 2))
        cov = sigma2 * inv
    else:
        cov = np.full((2, 2), np.inf)
    return coef, cov


def _ols_on_logs(x, y, w, *, regressor, origin, n_dropped):
    if len(y) < 2:
        raise FitError(f"need at least 2 positive points, got {len(y)}")
    if np.ptp(x) == 0:
        raise FitError("regressor has no spread; slope is not identifiable")
    coef, cov = _wls(x, np.log(y), w)
    se = float(np.sqrt(cov[1, 1]))
    return LogLinearFit(
        intercept=float(coef[0]), slope=float(coef[1]), slope_se=se,
        slope_p_value=_wald_p(float(coef[1]), se), n_points=len(y), method=OLS_ON_LOGS,
        regressor=regressor, origin=origin, n_dropped=n_dropped,
    )


def _poisson_deviance(y, mu, w):
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(y / mu), 0.0)
    return float(2.0 * np.sum(w * (term - (y - mu))))


def _poisson_irls(x, y, w, *, regressor, origin, n_dropped, max_iter, tol):
    if len(y) < 2:
        raise FitError(f"need at least 2 points, got {len(y)}")
    if np.ptp(x) == 0:
        raise FitError("regressor has no spread; slope is not identifiable")
    X = np.column_stack([np.ones_like(x), x])
    mu = y + np.average(y, weights=w) / 2 + 1e-8
    eta = np.log(mu)
    beta = np.linalg.lstsq(X * np.sqrt(w)[:, None], eta * np.sqrt(w), rcond=None)[0]
    eta = X @ beta
    mu = np.exp(eta)
    dev = _poisson_deviance(y, mu, w)
    trace = [dev]
    for it in range(1, max_iter + 1):
        W = w * mu
        z = eta + (y - mu) / mu
        sw = np.sqrt(W)
        proposal = np.linalg.lstsq(X * sw[:, None], z * sw, rcond=None)[0]
        step = proposal - beta
        # step halving keeps the deviance non-increasing
        for _ in range(30):
            cand = beta + step
            eta_c = X @ cand
            if np.all(eta_c < 700):
                mu_c = np.exp(eta_c)
                dev_c = _poisson_deviance(y, mu_c, w)
                if dev_c <= dev * (1 + 1e-12) + 1e-12:
                    break
            step = step / 2
        else:
            raise FitError("IRLS step halving failed", last=(float(beta[0]), float(beta[1])))
        beta, eta, mu = cand, eta_c, mu_c
        converged = abs(dev - dev_c) / (abs(dev_c) + 0.1) < tol
        dev = min(dev, dev_c)
        trace.append(dev)
        if converged:
            break
    else:
        raise FitError(f"IRLS did not converge in {max_iter} iterations",
                       last=(float(beta[0]), float(beta[1])))
    info = X.T @ (X * (w * mu)[:, None])
    cov = np.linalg.inv(info)
    se = float(np.sqrt(cov[1, 1]))
    return LogLinearFit(
        intercept=float(beta[0]), slope=float(beta[1]), slope_se=se,
        slope_p_value=_wald_p(float(beta[1]), se), n_points=len(y), method=POISSON_IRLS,
        regressor=regressor, origin=origin, n_dropped=n_dropped, iterations=it,
        deviance_trace=tuple(trace),
    )


def fit_log_time(
    y_means: Sequence[float],
    times: Sequence[float],
    weights: Sequence[float] | None = None,
    *,
    method: str = OLS_ON_LOGS,
    origin: float | None = None,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> LogLinearFit:
    """Fit ``log y = a + b (t - origin)``.

    ``origin`` defaults to the first time value, so the intercept is the
    log-rate at the first interval. NaN entries mark undefined group means
    and are skipped. With ``method="ols_on_logs"`` zero means are dropped too;
    ``"poisson_irls"`` keeps them and maximises the (weighted) Poisson
    likelihood with a log link.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    times = np.asarray(times, dtype=float)
    if origin is None:
        origin = float(times[0]) if times.size else 0.0
    x, y, w, dropped = _usable(times - origin, y_means, weights,
                               need_positive=method == OLS_ON_LOGS)
    if dropped:
        log.debug("fit_log_time: dropped %d unusable point(s)", dropped)
    if method == OLS_ON_LOGS:
        return _ols_on_logs(x, y, w, regressor="time", origin=float(origin), n_dropped=dropped)
    return _poisson_irls(x, y, w, regressor="time", origin=float(origin), n_dropped=dropped,
                         max_iter=max_iter, tol=tol)


def fit_loglog(i_values: Sequence[float], y_means: Sequence[float],
               weights: Sequence[float] | None = None) -> LogLinearFit:
    """OLS of ``log y`` on ``log i``: ``y = exp(intercept) * i ** slope``."""
    i_values = np.asarray(i_values, dtype=float)
    if np.any(i_values < 1):
        raise ValueError("group indices must be >= 1")
    x, y, w, dropped = _usable(np.log(i_values), y_means, weights, need_positive=True)
    return _ols_on_logs(x, y, w, regressor="log", origin=0.0, n_dropped=dropped)


def coefficient_chi2_test(fit: LogLinearFit) -> float:
    """Wald chi-square (1 df) p-value of the null ``slope == 0``.

    For OLS fits the statistic uses the residual-variance standard error,
    i.e. the F(1, n-2) test read on its chi-square asymptote.
    """
    se = fit.slope_se
    if not (se > 0) or not math.isfinite(se):
        raise FitError(f"degenerate fit: slope standard error is {se}")
    return float(stats.chi2.sf((fit.slope / se) ** 2, df=1))


class KSResult(NamedTuple):
    statistic: float
    p_value: float


def ks_statistic_poisson(sample, lam: float) -> float:
    """``sup_x |F_n(x) - F(x)|`` over the integer support."""
    sample = np.asarray(sample, dtype=np.int64)
    top = int(sample.max())
    counts = np.bincount(sample, minlength=top + 1)
    ecdf = np.cumsum(counts) / sample.size
    cdf = stats.poisson.cdf(np.arange(top + 1), lam)
    # both CDFs are step functions on the integers; past the sample maximum
    # the gap 1 - F(x) only shrinks
    return float(np.max(np.abs(ecdf - cdf)))


def _batch_statistics(draws: np.ndarray, lams: np.ndarray) -> np.ndarray:
    n_boot, n = draws.shape
    top = int(draws.max())
    width = top + 1
    flat = (np.arange(n_boot)[:, None] * width + draws).ravel()
    counts = np.bincount(flat, minlength=n_boot * width).reshape(n_boot, width)
    ecdf = np.cumsum(counts, axis=1) / n
    cdf = stats.poisson.cdf(np.arange(width)[None, :], lams[:, None])
    return np.max(np.abs(ecdf - cdf), axis=1)


def ks_test_poisson(sample, lam: float | None = None, *, n_boot: int = 1000,
                    seed: int = 0, batch: int = 250) -> KSResult:
    """One-sample KS test of a Poisson null on discrete data.

    The p-value comes from a parametric bootstrap: ``n_boot`` samples of the
    same size are drawn from the null and the statistic recomputed. When
    ``lam`` is not supplied it is estimated by the sample mean, and
    re-estimated on every bootstrap sample.
    """
    sample = np.asarray(sample)
    if sample.size == 0:
        raise ValueError("empty sample")
    if np.any(sample < 0) or np.any(sample != np.round(sample)):
        raise ValueError("sample must hold non-negative integers")
    sample = sample.astype(np.int64)
    estimate = lam is None
    if estimate:
        lam = float(sample.mean())
        if lam == 0.0:
            # all zeros: exactly the degenerate Poisson(0) law
            return KSResult(0.0, 1.0)
    elif lam <= 0:
        raise ValueError("lam must be positive")
    d_obs = ks_statistic_poisson(sample, lam)
    rng = np.random.default_rng(seed)
    exceed = 0
    done = 0
    while done < n_boot:
        b = min(batch, n_boot - done)
        draws = rng.poisson(lam, size=(b, sample.size))
        lams = draws.mean(axis=1) if estimate else np.full(b, lam)
        lams = np.where(lams > 0, lams, 1e-300)
        d_boot = _batch_statistics(draws, lams)
        exceed += int(np.count_nonzero(d_boot >= d_obs - 1e-12))
        done += b
    return KSResult(d_obs, (exceed + 1) / (n_boot + 1))


def ks_test_two_sample(a, b) -> KSResult:
    """Two-sample KS test with the asymptotic Kolmogorov p-value.

    The statistic is the largest ECDF gap over the merged support; the
    p-value uses ``sqrt(n m / (n + m)) * D``.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    support = np.union1d(a, b)
    fa = np.searchsorted(a, support, side="right") / a.size
    fb = np.searchsorted(b, support, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    p = float(stats.kstwobign.sf(en * d)) if d > 0 else 1.0
    return KSResult(d, min(max(p, 0.0), 1.0))


def pearson(x, y) -> float:
    """Product-moment correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and of equal length")
    if x.size < 2:
        raise UndefinedStatistic("need at least two pairs")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedStatistic("correlation is undefined for a constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def spearman(x, y) -> tuple[float, float]:
    """Rank correlation (mid-ranks for ties) and its t-approximation p-value.

    The p-value is NaN for fewer than three pairs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = pearson(stats.rankdata(x), stats.rankdata(y))
    n = x.size
    if n < 3:
        return r, float("nan")
    if abs(r) >= 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, float(2.0 * stats.t.sf(abs(t), df=n - 2))
