import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from cube_spectral import StableDensityEvaluator, stable_density, tail_constant
from cube_spectral.errors import InvalidParameter
from cube_spectral.subordination import (
    R0_FLOOR,
    TAIL_SWITCH,
    find_r0,
    verify_subordination,
)


def half_density(tau: float) -> float:
    """Closed form for gamma = 1/2: tau^{-3/2} e^{-1/(4 tau)} / (2 sqrt(pi))."""
    return tau ** (-1.5) * math.exp(-1.0 / (4.0 * tau)) / (2.0 * math.sqrt(math.pi))


def rotated_contour_density(gamma: float, tau: float) -> float:
    """Independent non-oscillatory representation:
    p(tau) = (1/pi) int_0^inf e^{-tau s} e^{-s^g cos(pi g)} sin(s^g sin(pi g)) ds.
    """
    def integrand(s):
        return (math.exp(-tau * s - s**gamma * math.cos(math.pi * gamma))
                * math.sin(s**gamma * math.sin(math.pi * gamma)))

    val, _ = quad(integrand, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val / math.pi


class TestTailConstant:
    @pytest.mark.parametrize("gamma", [0.2, 0.3, 0.5, 0.7, 0.9])
    def test_matches_gamma_function_identity(self, gamma):
        # int_0^inf (1 - e^-u) u^{-1-g} du = Gamma(1-g)/g
        analytic = gamma / gamma_fn(1.0 - gamma)
        assert tail_constant(gamma) == pytest.approx(analytic, rel=1e-10)

    def test_half_gamma_value(self):
        assert tail_constant(0.5) == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)),
                                                   rel=1e-10)

    def test_rejects_bad_gamma(self):
        for g in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(InvalidParameter):
                tail_constant(g)


class TestDensity:
    def test_half_gamma_closed_form(self):
        ev = StableDensityEvaluator(0.5)
        for tau in np.geomspace(0.01, 900.0, 60):
            assert ev.density(float(tau)) == pytest.approx(half_density(float(tau)),
                                                           abs=1e-9, rel=1e-7)

    @pytest.mark.parametrize("gamma,tau", [(0.3, 0.5), (0.7, 2.0), (0.7, 0.3),
                                           (0.9, 1.0), (0.4, 10.0)])
    def test_matches_rotated_contour_oracle(self, gamma, tau):
        ev = StableDensityEvaluator(gamma)
        assert ev.density(tau) == pytest.approx(rotated_contour_density(gamma, tau),
                                                abs=1e-9, rel=1e-8)

    def test_zero_for_nonpositive_argument(self):
        ev = StableDensityEvaluator(0.6)
        assert stable_density(ev, 0.0) == 0.0
        assert stable_density(ev, -3.0) == 0.0

    def test_nonnegative_on_wide_grid(self):
        ev = StableDensityEvaluator(0.35)
        vals = ev.density_grid(np.geomspace(1e-2, 1e4, 50))
        assert vals.min() >= -1e-12

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.8])
    def test_series_and_quadrature_agree_at_the_switch(self, gamma):
        from cube_spectral.subordination import _density_series

        ev = StableDensityEvaluator(gamma)
        tau = TAIL_SWITCH * 0.999  # oscillatory branch, same point for both
        oscillatory = ev.density(tau)
        series = _density_series(gamma, tau, ev._series)
        assert oscillatory == pytest.approx(series, rel=1e-6)

    def test_total_mass_is_one(self):
        ev = StableDensityEvaluator(0.5)
        body, _ = quad(lambda t: ev.density(t), 0.0, TAIL_SWITCH,
                       points=[1e-2, 0.1, 1.0, 10.0], limit=300)
        tail, _ = quad(half_density, TAIL_SWITCH, np.inf, limit=200)
        assert body + tail == pytest.approx(1.0, abs=1e-7)

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidParameter):
            StableDensityEvaluator(1.0)
        with pytest.raises(InvalidParameter):
            StableDensityEvaluator(0.5, quad_tol=-1.0)


class TestSubordinationIdentity:
    @pytest.mark.parametrize("gamma", [0.4, 0.5])
    def test_identity_holds(self, gamma):
        ev = StableDensityEvaluator(gamma)
        report = verify_subordination(ev, [0.0, 0.1, 1.0, 10.0])
        assert report.passed
        assert report.measured <= 1e-6

    def test_rejects_negative_lambda(self):
        ev = StableDensityEvaluator(0.5)
        with pytest.raises(InvalidParameter):
            verify_subordination(ev, [-1.0])


class TestTailBehaviour:
    def test_tail_ratio_approaches_one(self):
        ev = StableDensityEvaluator(0.6)
        r_near = abs(ev.tail_ratio(1e3) - 1.0)
        r_far = abs(ev.tail_ratio(1e6) - 1.0)
        assert r_near <= 0.02
        assert r_far < r_near

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.7])
    def test_threshold_and_time_horizon(self, gamma):
        ev = StableDensityEvaluator(gamma)
        r0 = find_r0(ev)
        assert r0 >= R0_FLOOR > 10.0
        assert ev.t0 == pytest.approx(r0 ** (-gamma))
        # the defining property at the threshold itself
        assert ev.tail_ratio(r0) >= 0.5

    def test_half_gamma_threshold_floor(self):
        ev = StableDensityEvaluator(0.5)
        assert ev.r0 == 16.0
        assert ev.t0 == pytest.approx(0.25)
