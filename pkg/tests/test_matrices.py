import numpy as np
import pytest

from coauthorcast.corpus import (AuthorTimeline, DatasetSlice, WindowSpec,
                                 build_timelines, slice_dataset)
from coauthorcast.errors import TrainingError
from coauthorcast.hyperopt import HyperParams
from coauthorcast.matrices import GroupMeans, compute_eta, compute_xi
from coauthorcast.synthetic import GenerativeSpec, PowerTimeSurface, generate

WINDOW = WindowSpec.from_years(T0=1990, T1=1990, T2=1996, I=10, K=4, L=4, M=3, I1=10,
                               t_U=1991, t_V=1992, t_X=1991, t_Y=1992, t_Z=1996)


def _slice(timelines, spec=WINDOW):
    return DatasetSlice("training", tuple(timelines), spec)


def _timeline(author, pubs, new=None):
    return AuthorTimeline(author=author, pubs_by_year=dict(pubs),
                          new_coauthors_by_year=dict(new or {}), first_year=min(pubs))


class TestExamples:
    def test_one_pub_per_year(self):
        # cutpoints 1990..1996; pubs in 1990, 1991, 1992
        tl = _timeline("a", {1990: 1, 1991: 1, 1992: 1})
        eta = compute_eta(_slice([tl]), WINDOW)
        assert eta.get(1, 1) == 1.0 and eta.get(2, 2) == 1.0
        assert eta.get(3, 3) == 0.0

    def test_zero_publications_still_observed(self):
        a = _timeline("a", {1990: 1, 1991: 2})
        b = _timeline("b", {1990: 1})
        eta = compute_eta(_slice([a, b]), WINDOW)
        assert eta.get(1, 1) == 1.0 and eta.counts[0, 0] == 2

    def test_xi_groups_by_annual_count(self):
        a = _timeline("a", {1990: 1, 1991: 2}, {1991: 3})
        xi = compute_xi(_slice([a]), WINDOW)
        assert xi.get(2, 1) == 3.0 and xi.counts[1, 0] == 1

    def test_zero_pub_year_joins_no_group(self):
        a = _timeline("a", {1990: 1, 1993: 1}, {1993: 1})
        xi = compute_xi(_slice([a]), WINDOW)
        assert xi.counts[:, 0].sum() == 0 and np.isnan(xi.get(1, 1))

    def test_empty_slice(self):
        with pytest.raises(TrainingError):
            compute_eta(_slice([]), WINDOW)

    def test_all_groups_empty(self):
        a = _timeline("a", {1996: 1})
        with pytest.raises(TrainingError):
            compute_xi(_slice([a]), WINDOW)


def _brute(members, spec):
    t = spec.cutpoints
    eta_s, eta_n = np.zeros((spec.K, spec.L)), np.zeros((spec.K, spec.L), int)
    xi_s, xi_n = np.zeros((spec.M, spec.L)), np.zeros((spec.M, spec.L), int)
    for tl in members:
        for j in range(1, spec.L + 1):
            hist = sum(c for y, c in tl.pubs_by_year.items() if spec.T0 <= y <= t[j - 1])
            cur = sum(c for y, c in tl.pubs_by_year.items() if t[j - 1] < y <= t[j])
            new = sum(c for y, c in tl.new_coauthors_by_year.items() if t[j - 1] < y <= t[j])
            if 1 <= hist <= spec.K:
                eta_s[hist - 1, j - 1] += cur
                eta_n[hist - 1, j - 1] += 1
            if 1 <= cur <= spec.M:
                xi_s[cur - 1, j - 1] += new
                xi_n[cur - 1, j - 1] += 1
    with np.errstate(invalid="ignore"):
        return eta_s / eta_n, eta_n, xi_s / xi_n, xi_n


class TestOracles:
    def test_brute_force_double_loop(self, small_slices, small_window):
        train = small_slices["training"]
        assert len(train) <= 300
        eta_v, eta_n, xi_v, xi_n = _brute(train.members, small_window)
        eta, xi = compute_eta(train, small_window), compute_xi(train, small_window)
        np.testing.assert_array_equal(eta.counts, eta_n)
        np.testing.assert_array_equal(xi.counts, xi_n)
        np.testing.assert_allclose(eta.values, eta_v, rtol=1e-12, equal_nan=True)
        np.testing.assert_allclose(xi.values, xi_v, rtol=1e-12, equal_nan=True)

    def test_eta_column_counts(self, small_slices, small_window):
        train = small_slices["training"]
        eta = compute_eta(train, small_window)
        t = small_window.cutpoints
        for j in range(1, small_window.L + 1):
            h = train.panel.h(t[j - 1])
            assert eta.counts[:, j - 1].sum() == np.count_nonzero((h >= 1) & (h <= small_window.K))

    def test_order_independent(self, small_corpus, small_window, rng):
        pubs, truth = small_corpus
        shuffled = [pubs[i] for i in rng.permutation(len(pubs))]
        out = []
        for p in (pubs, shuffled):
            tl = build_timelines(p, (small_window.T0, small_window.T2), authors=truth.authors)
            train = slice_dataset(tl, small_window, "training")
            out.append((compute_eta(train, small_window), compute_xi(train, small_window)))
        for a, b in zip(*out):
            np.testing.assert_array_equal(a.values, b.values)


@pytest.fixture(scope="module")
def constant_rate_training():
    spec = GenerativeSpec(n_authors=3000, first_year=1980, last_year=1995,
                          publication_rate=PowerTimeSurface(1.5),
                          coauthor_rate=PowerTimeSurface(0.8, power=1.0),
                          hyperparams=HyperParams(0.0, 1.0), entry_last=1984,
                          max_annual=8, padding=False, seed=11)
    pubs, truth = generate(spec)
    window = WindowSpec.from_years(T0=1980, T1=1985, T2=1995, I=20, K=8, L=8, M=6, I1=20,
                                   t_U=1990, t_V=1992, t_X=1990, t_Y=1991, t_Z=1995)
    tl = build_timelines(pubs, (1980, 1995), authors=truth.authors)
    return slice_dataset(tl, window, "training"), window


class TestMonteCarlo:
    def test_eta_matches_constant_rate(self, constant_rate_training):
        train, window = constant_rate_training
        eta = compute_eta(train, window)
        big = eta.counts >= 200
        assert big.sum() > 5
        se = np.sqrt(1.5 / eta.counts[big])
        assert np.all(np.abs(eta.values[big] - 1.5) <= 3 * se)

    def test_xi_matches_linear_rate(self, constant_rate_training):
        train, window = constant_rate_training
        xi = compute_xi(train, window)
        m = np.arange(1, window.M + 1)[:, None] * np.ones((1, window.L))
        big = xi.counts >= 200
        assert big.sum() > 5
        se = np.sqrt(0.8 * m[big] / xi.counts[big])
        assert np.all(np.abs(xi.values[big] - 0.8 * m[big]) <= 3 * se)


class TestCsv:
    def test_round_trip(self, small_slices, small_window):
        eta = compute_eta(small_slices["training"], small_window)
        back = GroupMeans.from_csv("eta", eta.to_csv(), eta.to_csv(counts=True))
        np.testing.assert_array_equal(back.values, eta.values)
        np.testing.assert_array_equal(back.counts, eta.counts)

    def test_header_and_missing_cells(self):
        g = GroupMeans("xi", np.array([[1.5, np.nan]]), np.array([[2, 0]]))
        assert g.to_csv() == "m/j,1,2\n1,1.5,\n"
