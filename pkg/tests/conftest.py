import numpy as np
import pytest

from coauthorcast.corpus import WindowSpec, build_timelines, slice_dataset
from coauthorcast.hyperopt import HyperParams
from coauthorcast.synthetic import GenerativeSpec, PowerTimeSurface, generate

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        detail = dict(item.user_properties).get("detail", "")
        _ACCEPTANCE.append((marker.kwargs["criterion"], marker.kwargs["title"], status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, title, status, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        line = f"[{status}] criterion {criterion}: {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))


@pytest.fixture
def small_window():
    """Ten training years, validation 1995-2000, forecasts 1995-2005."""
    return WindowSpec.from_years(T0=1980, T1=1985, T2=2005, I=40, K=10, L=10, M=6, I1=30,
                                 t_U=1995, t_V=2000, t_X=1995, t_Y=1998, t_Z=2005)


def make_corpus(n_authors=300, seed=0, *, tau=0.0, upsilon=1.0, padding=False,
                first=1980, last=2005, pub_scale=0.6, coauthor_scale=2.0):
    spec = GenerativeSpec(
        n_authors=n_authors, first_year=first, last_year=last,
        publication_rate=PowerTimeSurface(pub_scale, 0.01, 0.25, first),
        coauthor_rate=PowerTimeSurface(coauthor_scale, 0.01, 0.8, first),
        hyperparams=HyperParams(tau, upsilon), max_annual=6, padding=padding, seed=seed)
    return generate(spec)


@pytest.fixture(scope="session")
def small_corpus():
    return make_corpus()


@pytest.fixture
def small_slices(small_corpus, small_window):
    pubs, truth = small_corpus
    tl = build_timelines(pubs, (small_window.T0, small_window.T2), authors=truth.authors)
    return {role: slice_dataset(tl, small_window, role)
            for role in ("training", "validation", "test")}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def pipeline_runs(tmp_path_factory):
    """The bundled default profile run three times: twice on one thread, once on four."""
    from coauthorcast.cli import run_command

    root = tmp_path_factory.mktemp("pipeline")
    runs = {}
    for name, threads in (("first", 1), ("second", 1), ("threaded", 4)):
        out = root / name
        status = run_command(["pipeline", "--config", "paper-set4.cfg", "--seed", "7",
                              "--threads", str(threads), "--output", str(out)])
        runs[name] = (status, out)
    return runs
