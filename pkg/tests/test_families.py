import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy import special as sp

from edmlimit.errors import DensityUnavailableError, SamplerUnavailableError, TruncationError
from edmlimit.families import (
    HARMONIC_THETA_MAX,
    BesselCdfTable,
    EdmModel,
    bessel_cumulant,
    edm_cdf,
    edm_density,
    edm_laplace,
    edm_log_density,
    get_family,
    harmonic_cumulant,
    harmonic_tail,
    sample,
    sample_log,
    user_family,
)
from edmlimit.levy import LevyMeasure, cumulant_from_tail, estimate_ell
from edmlimit.special import confluent_half
from oracles import bessel_density_scipy, harmonic_k_bruteforce, integrate_positive_line

FAMILY_NAMES = ["gamma", "harmonic", "bessel"]


def rng(seed):
    return np.random.default_rng(seed)


class TestFamilyBasics:
    @pytest.mark.parametrize("name", FAMILY_NAMES)
    def test_laplace_at_zero(self, families, name):
        assert families[name].laplace(0.0) == 1.0
        assert families[name].k(0.0) == 0.0

    @pytest.mark.parametrize("name", FAMILY_NAMES)
    def test_index_estimate(self, families, name):
        tol = 0.05 if name == "gamma" else 0.1
        assert abs(estimate_ell(families[name].tail).ell - 1.0) < tol

    @pytest.mark.parametrize("name", FAMILY_NAMES)
    @pytest.mark.parametrize("c", [0.5, 2.0])
    def test_scaled_family_index(self, families, name, c):
        fam = families[name].scaled(c)
        assert fam.ell.ell == c
        assert abs(estimate_ell(fam.tail).ell - c) < 0.1 * c

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            get_family("cauchy")


class TestGamma:
    def test_cumulant(self, gamma):
        assert gamma.k(1.0) == pytest.approx(-math.log(2.0), rel=1e-15)
        assert gamma.k_log(800.0) == (pytest.approx(-800.0, rel=1e-15), False)

    def test_density(self, gamma):
        assert edm_density(EdmModel(gamma, 0.0, 1.0), 1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
        x = np.array([0.1, 1.0, 7.0])
        ours = edm_density(EdmModel(gamma, 1.5, 0.3), x)
        assert np.allclose(ours, stats.gamma.pdf(x, 0.3, scale=1 / 2.5), rtol=1e-12)

    def test_cdf(self, gamma):
        assert edm_cdf(EdmModel(gamma, 1.0, 0.3), 0.4) == pytest.approx(sp.gammainc(0.3, 0.8), rel=1e-12)

    def test_sample_mean(self, gamma):
        draws = sample(EdmModel(gamma, 0.0, 2.0), 100_000, rng(1))
        assert abs(draws.mean() - 2.0) < 0.05

    def test_sampler_distribution(self, gamma):
        draws = sample(EdmModel(gamma, 0.5, 0.2), 20_000, rng(2))
        assert stats.kstest(draws, stats.gamma(0.2, scale=1 / 1.5).cdf).pvalue > 1e-3

    def test_small_shape_log_sampler_is_finite(self, gamma):
        logs = sample_log(EdmModel(gamma, 0.0, 1e-3), 10_000, rng(3))
        assert np.all(np.isfinite(logs))
        assert logs.min() < -745.0  # far below what exp() can represent


class TestHarmonic:
    def test_tail_values(self, harmonic):
        assert harmonic_tail(0.15) == 2.45
        assert harmonic_tail(1.0) == 0.0
        assert harmonic_tail(0.999) == 1.0

    @pytest.mark.parametrize("theta", [0.5, 5.0, 300.0])
    def test_cumulant_against_bruteforce(self, theta):
        assert harmonic_cumulant(theta) == pytest.approx(harmonic_k_bruteforce(theta), rel=1e-13)

    def test_zero(self, harmonic):
        assert harmonic.k(0.0) == 0.0

    def test_truncation_cap(self):
        with pytest.raises(TruncationError):
            harmonic_cumulant(1e7)

    def test_large_theta_is_extrapolated(self, harmonic):
        v, flag = harmonic.k_log(math.log(HARMONIC_THETA_MAX) - 1.0)
        assert not flag
        v, flag = harmonic.k_log(math.log(1e300))
        assert flag
        # anchored continuation of slope -1 in log(theta); the true offset is -2 gamma_E
        assert v == pytest.approx(-math.log(1e300) - 2 * 0.5772156649, abs=1e-6)

    def test_no_density(self, harmonic):
        with pytest.raises(DensityUnavailableError, match="Monte Carlo"):
            edm_density(EdmModel(harmonic, 0.0, 1.0), 1.0)

    def test_sample_mean(self, harmonic):
        draws = sample(EdmModel(harmonic, 0.0, 1.0), 100_000, rng(4))
        assert abs(draws.mean() - math.pi**2 / 6) < 0.02

    def test_draws_positive_for_tiny_t(self, harmonic):
        logs = sample_log(EdmModel(harmonic, 0.0, 1e-3), 10_000, rng(5))
        assert np.all(np.isfinite(logs))

    def test_tilted_mean(self, harmonic):
        # E Y = -t k'(theta0)
        model = EdmModel(harmonic, 1.0, 0.5)
        draws = sample(model, 100_000, rng(6))
        mean = -0.5 * harmonic.k_prime(1.0)
        assert abs(draws.mean() - mean) < 4 * draws.std() / math.sqrt(draws.size)


class TestBessel:
    def test_laplace(self, bessel):
        assert bessel.laplace(0.0) == 1.0
        assert bessel.laplace(2.0) == pytest.approx(3 - math.sqrt(8), rel=1e-14)
        assert bessel_cumulant(1e-20) == pytest.approx(-math.sqrt(2e-20), rel=1e-9)

    def test_log_argument_branch_continuity(self, bessel):
        for s in (19.99, 20.01, 40.0, 300.0):
            v, flag = bessel.k_log(s)
            assert not flag
            # log L = -arccosh(1 + theta), free of the cancellation in theta + 1 - sqrt(...)
            assert v == pytest.approx(-float(np.arccosh(1.0 + math.exp(s))), rel=1e-14)
        assert bessel.k_log(2000.0)[0] == pytest.approx(-2000.0 - math.log(2.0), rel=1e-15)

    def test_derivative(self, bessel):
        assert bessel.k_prime(2.0) == pytest.approx(-1 / (math.sqrt(4.0) * math.sqrt(2.0)), rel=1e-15)
        assert bessel.k_prime(2.0) == pytest.approx(-0.353553, abs=1e-6)

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 5.0])
    def test_derivative_finite_difference(self, bessel, theta):
        h = 1e-5
        fd = (bessel.k(theta + h) - bessel.k(theta - h)) / (2 * h)
        assert abs(fd / bessel.k_prime(theta) - 1) < 1e-6

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
    def test_density_is_a_convolution(self, x):
        # e^{-2y}/sqrt(pi y) convolved with 1/sqrt(pi y) gives 1F1(1/2;1;-2x)
        conv = integrate.quad(
            lambda y: math.exp(-2 * y), 0.0, x, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-15, epsrel=1e-13
        )[0] / math.pi
        assert abs(conv / confluent_half(x) - 1) < 1e-8

    def test_density_normalised(self, bessel):
        model = EdmModel(bessel, 0.0, 1.0)
        mass = integrate_positive_line(lambda x: edm_density(model, x))
        assert abs(mass - 1.0) < 1e-6
        lt = integrate_positive_line(lambda x: math.exp(-x) * edm_density(model, x))
        assert lt == pytest.approx(2 - math.sqrt(3), abs=1e-9)

    @pytest.mark.parametrize("theta0,t", [(0.0, 0.3), (1.0, 1.0), (2.5, 4.0)])
    def test_density_against_scipy(self, bessel, theta0, t):
        model = EdmModel(bessel, theta0, t)
        for x in (1e-3, 0.5, 3.0, 60.0):
            assert edm_density(model, x) == pytest.approx(bessel_density_scipy(t, x, theta0), rel=1e-11)

    def test_tilted_density_normalised(self, bessel):
        model = EdmModel(bessel, 1.0, 0.5)
        assert integrate_positive_line(lambda x: edm_density(model, x)) == pytest.approx(1.0, abs=1e-7)

    def test_log_density_tiny_argument(self, bessel):
        lg = edm_log_density(EdmModel(bessel, 0.0, 0.01), np.array([1e-300]))
        assert np.isfinite(lg).all()

    @pytest.mark.parametrize("t,theta0", [(1.0, 0.0), (0.05, 0.0), (0.7, 2.0)])
    def test_table_cdf_against_quadrature(self, t, theta0):
        table = BesselCdfTable(t, theta0)
        for x in (0.01, 0.5, 2.0, 30.0):
            oracle = integrate.quad(lambda y: bessel_density_scipy(t, y, theta0), 0.0, x, limit=200,
                                    epsabs=1e-14, epsrel=1e-12)[0]
            assert table.cdf(np.array([x]))[0] == pytest.approx(oracle, abs=1e-9)

    def test_quantile_roundtrip(self):
        table = BesselCdfTable(0.3)
        p = np.array([1e-14, 1e-6, 0.01, 0.3, 0.5, 0.97, 1 - 1e-8, 1 - 1e-12])
        back = table.cdf_log(table.ppf_log(p))
        assert np.allclose(back, p, rtol=0, atol=1e-10)

    def test_median_quantile_against_quadrature(self):
        median = math.exp(BesselCdfTable(1.0).ppf_log(np.array([0.5]))[0])
        oracle = integrate.quad(lambda y: bessel_density_scipy(1.0, y), 0.0, median, epsrel=1e-12)[0]
        assert oracle == pytest.approx(0.5, abs=1e-9)

    def _median_cdf(self, bessel, n=100_000):
        model = EdmModel(bessel, 0.0, 1.0)
        draws = sample(model, n, rng(7))
        return edm_cdf(model, np.median(draws))

    def test_median_of_draws(self, bessel):
        assert abs(self._median_cdf(bessel) - 0.5) < 1e-3

    def test_median_of_draws_sampling_band(self, bessel):
        n = 100_000
        assert abs(self._median_cdf(bessel, n) - 0.5) < 3 * 0.5 / math.sqrt(n)


class TestEdmLaplace:
    def test_zero_shift(self, families):
        for fam in families.values():
            assert edm_laplace(EdmModel(fam, 0.7, 0.3), 0.0) == 1.0

    def test_gamma_closed_form(self, gamma):
        assert edm_laplace(EdmModel(gamma, 0.0, 0.1), 2.0**10) == pytest.approx(1025.0**-0.1, rel=1e-14)

    def test_bessel_closed_form(self, bessel):
        expected = (3 - math.sqrt(8)) / (2 - math.sqrt(3))
        assert edm_laplace(EdmModel(bessel, 1.0, 1.0), 1.0) == pytest.approx(expected, rel=1e-14)

    def test_out_of_range_is_an_error(self, harmonic):
        with pytest.raises(ValueError, match="beyond"):
            edm_laplace(EdmModel(harmonic, 0.0, 1.0), 1e9)

    def test_model_validation(self, gamma):
        with pytest.raises(ValueError):
            EdmModel(gamma, -1.0, 1.0)
        with pytest.raises(ValueError):
            EdmModel(gamma, 0.0, 0.0)

    def test_scaling_maps_dispersion(self, bessel):
        scaled = bessel.scaled(2.0)
        for s in (0.3, 4.0):
            assert edm_laplace(EdmModel(scaled, 0.5, 0.7), s) == pytest.approx(
                edm_laplace(EdmModel(bessel, 0.5, 1.4), s), rel=1e-14
            )

    @pytest.mark.parametrize("name", FAMILY_NAMES)
    @pytest.mark.parametrize("theta0", [0.0, 1.0])
    @pytest.mark.parametrize("t", [0.5, 1.0])
    def test_monte_carlo_agreement(self, families, name, theta0, t):
        model = EdmModel(families[name], theta0, t)
        seed = FAMILY_NAMES.index(name) * 100 + int(theta0) * 10 + int(2 * t)
        draws = sample(model, 100_000, rng(seed))
        for s in (0.5, 1.0, 2.0):
            w = np.exp(-s * draws)
            se = w.std() / math.sqrt(w.size)
            assert abs(w.mean() - edm_laplace(model, s)) < 3 * se


class TestConvolutionSemigroup:
    T, S = 0.4, 0.9

    def _sum_logs(self, fam, seed, n=10_000):
        a = sample_log(EdmModel(fam, 0.0, self.T), n, rng(seed))
        b = sample_log(EdmModel(fam, 0.0, self.S), n, rng(seed + 1))
        return np.logaddexp(a, b)

    def test_gamma(self, gamma):
        sums = np.exp(self._sum_logs(gamma, 10))
        model = EdmModel(gamma, 0.0, self.T + self.S)
        assert stats.kstest(sums, lambda x: edm_cdf(model, x)).statistic < 0.02

    def test_bessel(self, bessel):
        sums = np.exp(self._sum_logs(bessel, 20))
        table = BesselCdfTable(self.T + self.S)
        assert stats.kstest(sums, lambda x: table.cdf(x)).statistic < 0.02

    def test_harmonic(self, harmonic):
        sums = self._sum_logs(harmonic, 30)
        reference = sample_log(EdmModel(harmonic, 0.0, self.T + self.S), 100_000, rng(32))
        assert stats.ks_2samp(sums, reference).statistic < 0.02


class TestUserFamily:
    def spec_measure(self):
        return LevyMeasure.from_density(lambda x: math.exp(-2 * x) / x, name="rate-two-gamma")

    def test_quadrature_cumulant(self):
        fam = user_family(self.spec_measure())
        assert fam.k(3.0) == pytest.approx(-math.log1p(1.5), rel=1e-9)
        assert fam.cumulant.method == "quadrature"

    def test_closed_form_cumulant(self):
        fam = user_family(self.spec_measure(), cumulant=lambda th: -math.log1p(th / 2))
        assert fam.k(3.0) == pytest.approx(cumulant_from_tail(fam.tail, 3.0), rel=1e-9)

    def test_extrapolated_beyond_theta_max(self):
        fam = user_family(self.spec_measure())
        v, flag = fam.k_log(math.log(1e20))
        assert flag
        # continued from theta_max = 1e10 with the fitted index as slope
        anchor = -math.log1p(0.5e10)
        assert v == pytest.approx(anchor - fam.ell.ell * math.log(1e10), rel=1e-9)

    def test_declared_index_drives_extrapolation(self):
        nu = LevyMeasure.from_density(lambda x: math.exp(-2 * x) / x, known_index=1.0)
        v, flag = user_family(nu).k_log(math.log(1e20))
        assert flag
        assert v == pytest.approx(-math.log1p(0.5e20), rel=1e-9)

    def test_no_density_or_sampler(self):
        fam = user_family(self.spec_measure())
        with pytest.raises(DensityUnavailableError):
            edm_density(EdmModel(fam, 0.0, 1.0), 1.0)
        with pytest.raises(SamplerUnavailableError):
            sample(EdmModel(fam, 0.0, 1.0), 10, rng(0))
