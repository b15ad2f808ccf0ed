"""Acceptance criteria, one test per criterion.

Each test is marked ``acceptance`` and records a one-line detail; the
terminal summary prints a pass/fail line per criterion.
"""

import math
import os
import time

import numpy as np
import pytest
from scipy import stats

from coauthorcast.cli import run_command
from coauthorcast.corpus import AuthorTimeline, DatasetSlice, WindowSpec, build_timelines, \
    slice_dataset
from coauthorcast.evaluate import (auc_report, autocorrelation, distribution_report,
                                   trend_report)
from coauthorcast.export import read_json
from coauthorcast.glm import POISSON_IRLS, fit_log_time, ks_test_poisson
from coauthorcast.hyperopt import GAConfig, HyperParams, prepare_validation, run_ga
from coauthorcast.matrices import GroupMeans, compute_eta, compute_xi
from coauthorcast.predict import simulate
from coauthorcast.synthetic import GenerativeSpec, MatrixSurface, PowerTimeSurface, generate
from coauthorcast.training import LambdaMatrix, ZetaMatrix, fit_lambda, fit_zeta

DBLP_ENV = "COAUTHORCAST_DBLP"


@pytest.mark.acceptance(criterion=1, title="Poisson IRLS recovers alpha=0.5, beta=0.02")
def test_regression_recovery(record_property):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    t = rng.integers(0, 50, 10_000).astype(float)
    y = rng.poisson(np.exp(0.5 + 0.02 * t))
    fit = fit_log_time(y, t, method=POISSON_IRLS, origin=0.0)
    elapsed = time.perf_counter() - start
    record_property("detail", f"alpha={fit.intercept:.4f} beta={fit.slope:.4f} "
                              f"in {elapsed:.2f}s")
    assert abs(fit.intercept - 0.5) <= 0.05
    assert abs(fit.slope - 0.02) <= 0.05
    assert elapsed < 5


@pytest.mark.acceptance(criterion=2, title="rate-matrix extension reproduces an exact surface")
def test_surface_identity(record_property):
    spec = WindowSpec.from_years(T0=1980, T1=1990, T2=2010, I=30, K=10, L=10, M=6, I1=30,
                                 t_U=2000, t_V=2002, t_X=2000, t_Y=2001, t_Z=2010)
    assert spec.J == 20
    t = np.asarray(spec.cutpoints[1:], dtype=float)
    surface = np.exp(0.1 * (t - t[0]))[None, :] * np.arange(1, 31, dtype=float)[:, None] ** 0.5
    eta = GroupMeans("eta", surface[:10, :10].copy(), np.full((10, 10), 100))
    start = time.perf_counter()
    lam = fit_lambda(eta, spec)
    elapsed = time.perf_counter() - start
    rel = np.max(np.abs(lam.values / surface - 1))
    corner = np.max(np.abs(lam.values[10:, 10:] / surface[10:, 10:] - 1))
    record_property("detail", f"max rel err {rel:.1e} (corner block {corner:.1e}) "
                              f"in {elapsed * 1000:.0f}ms")
    np.testing.assert_allclose(lam.values, surface, rtol=1e-9, atol=0)
    assert elapsed < 1


@pytest.fixture(scope="module")
def ga_problem():
    """Validation data from the generator with tau=0.2, upsilon=0.7 and a known zeta."""
    spec = WindowSpec.from_years(T0=1970, T1=1980, T2=2010, I=60, K=20, L=15, M=10, I1=40,
                                 t_U=1995, t_V=2005, t_X=1995, t_Y=1996, t_Z=2010)
    zeta = np.tile(4.0 * np.arange(1, spec.M + 1)[:, None], (1, spec.J))
    gen = GenerativeSpec(n_authors=3200, first_year=1981, last_year=2010, entry_last=1994,
                         publication_rate=PowerTimeSurface(1.0),
                         coauthor_rate=MatrixSurface(zeta, 1981),
                         hyperparams=HyperParams(0.2, 0.7), max_annual=spec.M, padding=False,
                         seed=1)
    pubs, truth = generate(gen)
    timelines = build_timelines(pubs, (spec.T0, spec.T2), authors=truth.authors)
    validation = slice_dataset(timelines, spec, "validation")
    return validation, ZetaMatrix(values=zeta), spec


@pytest.mark.acceptance(criterion=3, title="genetic search recovers tau=0.2, upsilon=0.7")
def test_ga_recovery(ga_problem, record_property):
    validation, zeta, spec = ga_problem
    assert len(validation) >= 2000
    hits, slowest, found = 0, 0.0, []
    for seed in range(10):
        start = time.perf_counter()
        res = run_ga(GAConfig(n0=400, n3=500, seed=seed), validation, zeta, spec)
        slowest = max(slowest, time.perf_counter() - start)
        found.append(res.best)
        hits += abs(res.best.tau - 0.2) <= 0.05 and abs(res.best.upsilon - 0.7) <= 0.05
    taus = [hp.tau for hp in found]
    ups = [hp.upsilon for hp in found]
    record_property("detail", f"{hits}/10 seeds within 0.05; tau {min(taus):.3f}..{max(taus):.3f}"
                              f", upsilon {min(ups):.3f}..{max(ups):.3f}; "
                              f"{len(validation)} researchers, slowest run {slowest:.1f}s")
    assert hits >= 9
    assert slowest < 120


def _enumerate_one_step(lam, zt, mass=1 - 1e-9):
    """Exact moments of (dh, dk) for one step, summing outcomes until ``mass`` is covered."""
    top_r = int(stats.poisson.ppf(mass, lam)) + 1
    top_u = int(stats.poisson.ppf(mass, zt)) + 1
    e_dh = e_dk = e_dk2 = covered = 0.0
    for r in range(top_r + 1):
        pr = stats.poisson.pmf(r, lam)
        e_dh += r * pr
        if r == 0:
            covered += pr
            continue
        for u in range(top_u + 1):
            p = pr * stats.poisson.pmf(u, zt)
            e_dk += u * p
            e_dk2 += u * u * p
            covered += p
    assert covered >= mass - 1e-9
    return e_dh, e_dk, e_dk2 - e_dk**2


@pytest.mark.acceptance(criterion=4, title="one-step simulation matches enumeration")
def test_monte_carlo_consistency(record_property):
    spec = WindowSpec.from_years(T0=1985, T1=1990, T2=1994, I=20, K=5, L=2, M=12, I1=20,
                                 t_U=1991, t_V=1992, t_X=1992, t_Y=1993, t_Z=1994)
    member = AuthorTimeline("a", {1990: 3}, {1990: 5}, 1990)
    test = DatasetSlice("test", (member,), spec)
    lam = LambdaMatrix(values=np.full((spec.I, spec.J), 1.0))
    zeta = ZetaMatrix(values=np.full((spec.M, spec.J), 2.0))
    R = 100_000
    start = time.perf_counter()
    f = simulate(test, lam, zeta, HyperParams(0.0, 1.0), spec, replicates=R, seed=17).forecasts[0]
    elapsed = time.perf_counter() - start
    dh = f.h[:, 1] - f.h[:, 0]
    dk = f.k[:, 1] - f.k[:, 0]
    e_dh, e_dk, var_dk = _enumerate_one_step(1.0, 2.0)
    se_dh, se_dk = math.sqrt(1.0 / R), math.sqrt(var_dk / R)
    z_dh, z_dk = (dh.mean() - e_dh) / se_dh, (dk.mean() - e_dk) / se_dk
    record_property("detail", f"mean dh {dh.mean():.4f} vs {e_dh:.4f} (z={z_dh:+.2f}), "
                              f"mean dk {dk.mean():.4f} vs {e_dk:.4f} (z={z_dk:+.2f}) "
                              f"in {elapsed:.2f}s")
    assert abs(z_dh) <= 3 and abs(z_dk) <= 3
    assert dh.std() / math.sqrt(R) <= se_dh * 1.01
    assert elapsed < 10


@pytest.mark.acceptance(criterion=5, title="train, tune and predict on a model-drawn corpus")
def test_end_to_end_self_consistency(record_property):
    start = time.perf_counter()
    spec = WindowSpec.from_years(T0=1980, T1=1990, T2=2015, I=120, K=25, L=17, M=10, I1=40,
                                 t_U=2000, t_V=2007, t_X=2000, t_Y=2008, t_Z=2015)
    gen = GenerativeSpec(n_authors=5000, first_year=1980, last_year=2015, entry_last=2005,
                         publication_rate=PowerTimeSurface(0.6, 0.01, 0.25, 1990),
                         coauthor_rate=PowerTimeSurface(8.0, 0.01, 0.8, 1990),
                         hyperparams=HyperParams(0.0, 1.0), max_annual=10, seed=1)
    pubs, truth = generate(gen)
    timelines = build_timelines(pubs, (spec.T0, spec.T2), authors=truth.authors)
    train, val, test = (slice_dataset(timelines, spec, role)
                        for role in ("training", "validation", "test"))
    lam = fit_lambda(compute_eta(train, spec), spec, lenient=True)
    zeta = fit_zeta(compute_xi(train, spec), spec, lenient=True)
    hp = run_ga(GAConfig(seed=1), val, zeta, spec).best
    sim = simulate(test, lam, zeta, hp, spec, replicates=100, seed=3)
    trend = trend_report(test, sim.forecasts, spec)
    dist = distribution_report(test, sim.forecasts, spec)
    auc = auc_report(test, lam, zeta, hp, spec)
    elapsed = time.perf_counter() - start
    ks_share = float(np.mean(dist.p_values > 0.05))
    record_property("detail", f"s2 min {trend.s2.min():.4f} over {len(trend.years)} years, "
                              f"KS p>0.05 in {ks_share:.0%} of years, AUC {auc.auc:.3f}; "
                              f"{len(test)} test researchers, {elapsed:.0f}s")
    assert np.all(trend.s2 >= 0.95)
    assert ks_share >= 0.8
    assert auc.auc > 0.5
    assert elapsed < 300


@pytest.mark.acceptance(criterion=6, title="Poisson KS calibration and power")
def test_ks_calibration(record_property):
    false_alarms = detections = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pure = rng.poisson(2.0, 500)
        mixed = np.where(rng.random(500) < 0.5, rng.poisson(1.0, 500), rng.poisson(8.0, 500))
        false_alarms += ks_test_poisson(pure, n_boot=1000, seed=seed).p_value <= 0.05
        detections += ks_test_poisson(mixed, n_boot=1000, seed=seed).p_value <= 0.05
    record_property("detail", f"Poisson(2) rejected {false_alarms}/100, "
                              f"Poisson(1)/Poisson(8) mixture rejected {detections}/100")
    assert false_alarms <= 10
    assert detections >= 90


@pytest.mark.acceptance(criterion=7, title="autocorrelation hand value and affine invariance")
def test_autocorrelation_exactness(record_property):
    r1 = autocorrelation([1, 2, 3, 4, 5], 1)[0]
    y = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0])
    # Transforms whose values a + b*y are exact in binary, so any deviation is the estimator's.
    transforms = ((0.0, 2.0), (-7.5, 0.25), (100.0, 3.0), (-40.0, 0.5), (12.0, 8.0),
                  (2.0**20, 2.0**-10))
    for a, b in transforms:
        assert np.array_equal((a + b * y - a) / b, y)
    worst = max(float(np.max(np.abs(autocorrelation(a + b * y, 4) - autocorrelation(y, 4))))
                for a, b in transforms)
    record_property("detail", f"r_1 = {float(r1)!r}; largest affine deviation {worst:.1e}")
    assert r1 == 0.4
    assert worst <= 1e-12


@pytest.mark.acceptance(criterion=8, title="pipeline artifacts byte-identical across runs and threads")
def test_pipeline_determinism(pipeline_runs, record_property):
    statuses = {name: status for name, (status, _) in pipeline_runs.items()}
    assert set(statuses.values()) == {0}
    _, ref = pipeline_runs["first"]
    names = sorted(p.name for p in ref.iterdir())
    mismatched = []
    for other in ("second", "threaded"):
        _, out = pipeline_runs[other]
        assert sorted(p.name for p in out.iterdir()) == names
        mismatched += [f"{other}/{n}" for n in names
                       if (ref / n).read_bytes() != (out / n).read_bytes()]
    record_property("detail", f"{len(names)} artifacts compared over 3 runs (threads 1, 1, 4); "
                              f"{len(mismatched)} differ")
    assert not mismatched, mismatched


@pytest.mark.acceptance(criterion=9, title="full-corpus coverage and hyperparameters (reported)")
def test_corpus_scale(tmp_path, record_property):
    dump = os.environ.get(DBLP_ENV)
    if not dump:
        record_property("detail", f"not run: set {DBLP_ENV} to a dblp.xml(.gz) dump")
        pytest.skip(f"{DBLP_ENV} is not set")
    args = ["--config", "paper-set4.cfg", "--seed", "1", "--output", str(tmp_path),
            "--set", f"input.path={os.path.abspath(dump)}", "--set", "input.format=dblp-xml",
            "--set", "input.authors_file=", "--set", "train.lenient=false"]
    for stage in ("ingest", "matrices", "train", "tune"):
        assert run_command([stage, *args]) == 0, stage
    coverage = read_json(tmp_path / "slices.json")["slices"]["test"]["coverage"]
    hp = read_json(tmp_path / "hyperparams.json")
    within = (abs(coverage * 100 - 99.96) <= 0.1, abs(hp["upsilon"] - 0.603) <= 0.05,
              abs(hp["tau"] - 0.321) <= 0.05)
    record_property("detail", f"test coverage {coverage:.4%} (target 99.96% +-0.1: {within[0]}); "
                              f"upsilon {hp['upsilon']:.3f} ({within[1]}), "
                              f"tau {hp['tau']:.3f} ({within[2]}); reported, not gating")
