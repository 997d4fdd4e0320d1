import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy import special as sp

from edmlimit.errors import SeriesError
from edmlimit.special import (
    EULER_GAMMA,
    SeriesEvalPolicy,
    bessel_i,
    confluent_half,
    exp_integral_e1,
    harmonic_number,
    log_bessel_i,
    reg_lower_incomplete_gamma,
)


def truncated_bessel_series(order, x, terms=20):
    return sum(
        (x / 2.0) ** (2 * n + order) / (math.factorial(n) * math.gamma(n + 1 + order))
        for n in range(terms)
    )


class TestBessel:
    def test_order_one_small_argument(self):
        assert bessel_i(1.0, 0.2) == pytest.approx(0.1005008, abs=5e-8)
        assert bessel_i(1.0, 0.2) == pytest.approx(truncated_bessel_series(1.0, 0.2), rel=1e-14)

    def test_zero_argument(self):
        for order in (0.01, 0.5, 1.0, 3.7):
            assert bessel_i(order, 0.0) == 0.0
        assert bessel_i(0.0, 0.0) == 1.0

    @pytest.mark.parametrize("x", [0.01, 0.3, 1.0, 7.5, 29.0, 31.0, 200.0])
    def test_half_integer_closed_form(self, x):
        closed = math.sqrt(2.0 / (math.pi * x)) * math.sinh(x)
        assert bessel_i(0.5, x) == pytest.approx(closed, rel=1e-12)
        assert bessel_i(0.5, 1.0) == pytest.approx(0.937674, abs=1e-6)

    @pytest.mark.parametrize("order", [1e-3, 0.05, 0.5, 1.0, 2.5, 10.0])
    @pytest.mark.parametrize("x", [1e-8, 0.1, 2.0, 29.9, 30.1, 100.0, 700.0, 1e4])
    def test_scaled_against_scipy(self, order, x):
        ours = log_bessel_i(order, x, scaled=True)
        assert ours == pytest.approx(math.log(sp.ive(order, x)), rel=1e-12, abs=1e-13)

    @pytest.mark.parametrize("order", [0.5, 1.0, 3.0])
    def test_series_against_truncated_oracle(self, order):
        for x in np.linspace(0.1, 30.0, 25):
            oracle = truncated_bessel_series(order, x, terms=120)
            assert bessel_i(order, x) == pytest.approx(oracle, rel=1e-10)

    def test_log_scale_beyond_overflow(self):
        with pytest.raises(OverflowError):
            bessel_i(1.0, 800.0)
        val = log_bessel_i(1.0, 800.0)
        assert val == pytest.approx(800.0 + math.log(sp.ive(1.0, 800.0)), rel=1e-14)

    def test_log_argument_far_outside_float_range(self):
        # x = e^{-2000}: leading series term only
        order = 0.5
        lead = order * (-2000.0 - math.log(2.0)) - math.lgamma(1.5)
        assert log_bessel_i(order, log_x=-2000.0) == pytest.approx(lead, rel=1e-15)
        # x = e^{1386}: I scaled by e^{-x} is (2 pi x)^{-1/2}
        assert log_bessel_i(1e-3, log_x=1386.0, scaled=True) == pytest.approx(
            -0.5 * (math.log(2 * math.pi) + 1386.0), rel=1e-14
        )

    @pytest.mark.parametrize("nu", [1.0, 2.0, 3.0])
    @pytest.mark.parametrize("x", [0.5, 1.0, 5.0, 20.0])
    def test_recurrence(self, nu, x):
        lhs = bessel_i(nu - 1.0, x) - bessel_i(nu + 1.0, x)
        rhs = 2.0 * nu / x * bessel_i(nu, x)
        assert abs(lhs - rhs) / abs(rhs) < 1e-8

    @pytest.mark.parametrize("order,x", [(14.0, 764.0), (20.0, 1599.0), (5.5, 800.0)])
    def test_series_past_double_range(self, order, x):
        # order**2 too large for the Hankel branch, x large enough to overflow a plain series
        ours = log_bessel_i(order, x, scaled=True)
        assert ours == pytest.approx(math.log(sp.ive(order, x)), rel=1e-12)

    def test_vectorised_matches_scalar(self):
        xs = np.array([0.0, 1e-3, 1.0, 40.0, 900.0])
        vec = log_bessel_i(0.3, xs)
        for x, v in zip(xs, vec):
            assert v == log_bessel_i(0.3, float(x))

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            bessel_i(-1.0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(order=st.floats(1e-3, 20.0), x=st.floats(1e-6, 1e5))
    def test_property_matches_scipy(self, order, x):
        expected = math.log(sp.ive(order, x))
        assert log_bessel_i(order, x, scaled=True) == pytest.approx(expected, rel=1e-11, abs=1e-12)


class TestSeriesPolicy:
    def test_bounds(self):
        with pytest.raises(ValueError):
            SeriesEvalPolicy(max_terms=10)
        with pytest.raises(ValueError):
            SeriesEvalPolicy(rel_tol=1e-6)

    def test_cap_is_an_error(self):
        tight = SeriesEvalPolicy(max_terms=50, rel_tol=1e-16)
        with pytest.raises(SeriesError):
            confluent_half(20.0, method="series", policy=tight)


class TestConfluent:
    def test_origin(self):
        assert confluent_half(0.0) == 1.0

    def test_x_one_against_quadrature(self):
        oracle = integrate.quad(
            lambda t: math.exp(-2 * t), 0, 1, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-15
        )[0] / math.pi
        assert confluent_half(1.0) == pytest.approx(oracle, rel=1e-13)
        assert confluent_half(1.0, method="integral") == pytest.approx(oracle, rel=1e-13)

    def test_equals_scaled_bessel_zero(self):
        for x in (0.01, 3.0, 19.0, 25.0, 500.0, 2000.0):
            assert confluent_half(x) == pytest.approx(sp.i0e(x), rel=1e-12)

    def test_series_and_integral_agree_on_overlap(self):
        for x in np.linspace(10.0, 20.0, 51):
            a = confluent_half(x, method="series")
            b = confluent_half(x, method="integral")
            assert abs(a - b) / b < 1e-9

    @pytest.mark.parametrize("x", [1e2, 1e3, 1e4])
    def test_large_x_decay(self, x):
        scaled = math.sqrt(x) * confluent_half(x)
        assert scaled == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=2e-3)
        assert x * math.sqrt(x) * confluent_half(x) < x

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            confluent_half(-1.0)

    @settings(max_examples=100, deadline=None)
    @given(x=st.floats(0.0, 5000.0))
    def test_property_in_unit_interval(self, x):
        v = confluent_half(x)
        assert 0.0 < v <= 1.0


class TestIncompleteGamma:
    def test_exponential_case(self):
        assert reg_lower_incomplete_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)

    def test_zero(self):
        assert reg_lower_incomplete_gamma(0.1, 0.0) == 0.0

    def test_small_shape_large_x_against_quadrature(self):
        tail = integrate.quad(lambda y: y ** -0.9 * math.exp(-y), 10.0, np.inf)[0] / math.gamma(0.1)
        assert reg_lower_incomplete_gamma(0.1, 10.0) == pytest.approx(1.0 - tail, abs=1e-13)
        assert reg_lower_incomplete_gamma(0.1, 10.0) == pytest.approx(0.999999, abs=1e-6)

    @pytest.mark.parametrize("s", [1e-3, 0.01, 0.5, 1.0, 3.3, 40.0])
    def test_against_scipy(self, s):
        for x in (1e-10, 1e-3, 0.5, s, s + 1.0, 2 * s + 3, 80.0, 300.0):
            assert reg_lower_incomplete_gamma(s, x) == pytest.approx(sp.gammainc(s, x), rel=1e-12, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(s=st.floats(1e-3, 50.0), a=st.floats(0.0, 200.0), b=st.floats(0.0, 200.0))
    def test_property_monotone_in_unit_interval(self, s, a, b):
        lo, hi = sorted((a, b))
        p_lo, p_hi = reg_lower_incomplete_gamma(s, lo), reg_lower_incomplete_gamma(s, hi)
        assert 0.0 <= p_lo <= p_hi + 1e-15 <= 1.0 + 1e-15


class TestExpIntegral:
    def test_values(self):
        oracle = integrate.quad(lambda y: math.exp(-y) / y, 0.01, np.inf, epsrel=1e-13, limit=200)[0]
        assert exp_integral_e1(0.01) == pytest.approx(oracle, rel=1e-12)
        assert exp_integral_e1(0.01) == pytest.approx(4.03793, abs=1e-5)
        series = -EULER_GAMMA + sum((-1) ** (n + 1) / (n * math.factorial(n)) for n in range(1, 40))
        assert exp_integral_e1(1.0) == pytest.approx(series, rel=1e-14)
        assert exp_integral_e1(1.0) == pytest.approx(0.219384, abs=1e-6)

    def test_large_argument(self):
        for x in (10.0, 100.0, 700.0):
            assert exp_integral_e1(x) * x * math.exp(x) == pytest.approx(1.0, abs=1.5 / x)
        assert exp_integral_e1(1e4) == 0.0

    def test_small_argument_log_behaviour(self):
        for x in np.geomspace(1e-12, 0.1, 30):
            assert abs(exp_integral_e1(x) + math.log(x) + EULER_GAMMA) < 2 * x

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            exp_integral_e1(0.0)

    @settings(max_examples=100, deadline=None)
    @given(x=st.floats(1e-300, 700.0))
    def test_property_against_scipy(self, x):
        assert exp_integral_e1(x) == pytest.approx(sp.exp1(x), rel=1e-12)


class TestHarmonicNumber:
    def test_exact_small(self):
        assert harmonic_number(6) == 2.45
        assert harmonic_number(0) == 0.0

    @pytest.mark.parametrize("m", [65, 100, 10**4, 10**7])
    def test_asymptotic_branch(self, m):
        direct = math.fsum(1.0 / np.arange(1, m + 1))
        assert harmonic_number(m) == pytest.approx(direct, rel=1e-14)
