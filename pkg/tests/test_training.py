import numpy as np
import pytest

from coauthorcast.corpus import WindowSpec
from coauthorcast.errors import TrainingError
from coauthorcast.matrices import GroupMeans
from coauthorcast.training import (PROVENANCE, LambdaMatrix, ZetaMatrix, fit_lambda,
                                   fit_zeta)


def window(I=30, K=10, L=10, M=6, years=20):
    return WindowSpec.from_years(T0=1980, T1=1990, T2=1990 + years, I=I, K=K, L=L, M=M, I1=30,
                                 t_U=2000, t_V=2002, t_X=2000, t_Y=2001, t_Z=1990 + years)


def surface_eta(spec, beta=0.1, nu=0.5, scale=1.0):
    t = np.asarray(spec.cutpoints[1:spec.L + 1], dtype=float)
    i = np.arange(1, spec.K + 1, dtype=float)[:, None]
    values = scale * np.exp(beta * (t - t[0]))[None, :] * i**nu
    return GroupMeans("eta", values, np.full(values.shape, 50))


def surface_truth(spec, beta=0.1, nu=0.5, scale=1.0):
    t = np.asarray(spec.cutpoints[1:], dtype=float)
    i = np.arange(1, spec.I + 1, dtype=float)[:, None]
    return scale * np.exp(beta * (t - t[0]))[None, :] * i**nu


class TestFitLambda:
    def test_surface_identity(self):
        spec = window()
        lam = fit_lambda(surface_eta(spec), spec)
        assert lam.values.shape == (30, 20)
        np.testing.assert_allclose(lam.values, surface_truth(spec), rtol=1e-9, atol=0)

    def test_surface_identity_irls(self):
        spec = window()
        lam = fit_lambda(surface_eta(spec), spec, method="poisson_irls")
        np.testing.assert_allclose(lam.values, surface_truth(spec), rtol=1e-7)

    def test_provenance_regions(self):
        spec = window()
        prov = fit_lambda(surface_eta(spec), spec).provenance
        K, L = spec.K, spec.L
        assert np.all(prov[:K, :L] == PROVENANCE.index("observed-fit"))
        assert np.all(prov[:K, L:] == PROVENANCE.index("row-extrapolated"))
        assert np.all(prov[K:, :L] == PROVENANCE.index("column-extrapolated"))
        assert np.all(prov[K:, L:] == PROVENANCE.index("averaged"))

    def test_no_extrapolation_when_k_equals_i(self):
        spec = window(I=10, K=10, L=20)
        t = np.asarray(spec.cutpoints[1:], dtype=float)
        rng = np.random.default_rng(0)
        values = np.exp(rng.normal(0, 0.3, (10, 20)))
        lam = fit_lambda(GroupMeans("eta", values, np.ones((10, 20), int)), spec)
        assert all(f is None for f in lam.col_fits)
        for i in range(10):
            z = np.polyfit(t - t[0], np.log(values[i]), 1)
            np.testing.assert_allclose(np.log(lam.values[i]), np.polyval(z, t - t[0]), atol=1e-9)

    def test_fitted_values_match_regression(self, rng):
        spec = window()
        eta = surface_eta(spec)
        noisy = GroupMeans("eta", eta.values * np.exp(rng.normal(0, 0.1, eta.values.shape)),
                           eta.counts)
        lam = fit_lambda(noisy, spec)
        t = np.asarray(spec.cutpoints[1:spec.L + 1], dtype=float)
        for i in range(spec.K):
            np.testing.assert_allclose(lam.values[i, :spec.L], lam.row_fits[i].predict(t),
                                       rtol=1e-12)

    def test_all_positive_and_bit_identical(self, rng):
        spec = window()
        eta = surface_eta(spec)
        noisy = GroupMeans("eta", eta.values * rng.uniform(0.5, 1.5, eta.values.shape),
                           eta.counts)
        a, b = fit_lambda(noisy, spec), fit_lambda(noisy, spec)
        assert np.all(a.values > 0)
        assert a.values.tobytes() == b.values.tobytes()

    def test_strict_unusable_row_names_index(self):
        spec = window()
        eta = surface_eta(spec)
        eta.values[6, 1:] = np.nan
        eta.counts[6, 1:] = 0
        with pytest.raises(TrainingError, match="i=7"):
            fit_lambda(eta, spec)

    def test_lenient_row_fallback(self):
        spec = window()
        eta = surface_eta(spec)
        eta.values[6, 1:] = np.nan
        eta.counts[6, 1:] = 0
        lam = fit_lambda(eta, spec, lenient=True)
        np.testing.assert_allclose(lam.values, surface_truth(spec), rtol=1e-9)
        assert lam.provenance[6, 0] == PROVENANCE.index("column-extrapolated")

    def test_lenient_column_fallback(self):
        spec = window()
        eta = surface_eta(spec)
        eta.values[1:, 3] = np.nan
        eta.counts[1:, 3] = 0
        with pytest.raises(TrainingError, match="j=4"):
            fit_lambda(eta, spec)
        lam = fit_lambda(eta, spec, lenient=True)
        np.testing.assert_allclose(lam.values, surface_truth(spec), rtol=1e-9)

    def test_shape_mismatch(self):
        spec = window()
        with pytest.raises(TrainingError):
            fit_lambda(GroupMeans("eta", np.ones((3, 3)), np.ones((3, 3), int)), spec)

    def test_rate_clamps(self):
        spec = window()
        lam = fit_lambda(surface_eta(spec), spec)
        assert lam.rate(0, 1) == lam.values[0, 0]
        assert lam.rate(500, 2) == lam.values[-1, 1]

    def test_csv_round_trip(self):
        spec = window()
        lam = fit_lambda(surface_eta(spec), spec)
        back = LambdaMatrix.from_csv(lam.to_csv())
        assert back.values.tobytes() == lam.values.tobytes()
        assert lam.provenance_csv().splitlines()[1].startswith("1,observed-fit")
        assert lam.coefficients_csv().startswith("kind,index,intercept,slope")


class TestFitZeta:
    def _xi(self, spec, values=None):
        t = np.asarray(spec.cutpoints[1:spec.L + 1], dtype=float)
        m = np.arange(1, spec.M + 1, dtype=float)[:, None]
        if values is None:
            values = 0.8 * m * np.exp(0.05 * (t - t[0]))[None, :]
        return GroupMeans("xi", values, np.full(values.shape, 30))

    def test_surface_identity(self):
        spec = window(M=12)
        zeta = fit_zeta(self._xi(spec), spec)
        t = np.asarray(spec.cutpoints[1:], dtype=float)
        truth = 0.8 * np.arange(1, 13)[:, None] * np.exp(0.05 * (t - t[0]))[None, :]
        assert zeta.M == 12 and zeta.J == 20
        np.testing.assert_allclose(zeta.values, truth, rtol=1e-9)

    def test_constant_row(self):
        spec = window()
        zeta = fit_zeta(self._xi(spec, np.full((6, 10), 2.0)), spec)
        np.testing.assert_allclose(zeta.values, 2.0, rtol=1e-12)
        assert all(abs(f.slope) < 1e-12 for f in zeta.fits)

    def test_significance_recorded(self, rng):
        spec = window()
        values = self._xi(spec).values * np.exp(rng.normal(0, 0.05, (6, 10)))
        zeta = fit_zeta(self._xi(spec, values), spec)
        assert np.all((zeta.significance >= 0) & (zeta.significance <= 1))
        assert np.all(zeta.significance < 0.05)

    def test_unusable_row(self):
        spec = window()
        xi = self._xi(spec)
        xi.values[5, 1:] = np.nan
        xi.counts[5, 1:] = 0
        with pytest.raises(TrainingError, match="m=6"):
            fit_zeta(xi, spec)
        zeta = fit_zeta(xi, spec, lenient=True)
        assert zeta.fallback_rows == (6,)
        assert np.all(zeta.values > 0)
        t = np.asarray(spec.cutpoints[1:], dtype=float)
        np.testing.assert_allclose(zeta.values[5], 4.8 * np.exp(0.05 * (t - t[0])), rtol=1e-9)

    def test_csv_round_trip(self):
        spec = window()
        zeta = fit_zeta(self._xi(spec), spec)
        assert ZetaMatrix.from_csv(zeta.to_csv()).values.tobytes() == zeta.values.tobytes()
