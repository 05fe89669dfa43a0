import math

import numpy as np
import pytest
from scipy.integrate import quad

from cube_spectral.cube import CubeFunction, apply_multiplier, fwht, heat, popcounts
from cube_spectral.errors import InvalidInput, InvalidParameter
from cube_spectral.kernel import (
    BumpFunction,
    build_plan,
    construct_bump,
    group_convolve,
    heat_kernel,
    modified_kernel,
    verify_modification,
)
from cube_spectral.subordination import StableDensityEvaluator


class TestBump:
    def test_band_moments_vanish(self):
        bump = construct_bump([1, 2])
        assert abs(bump.moment(1.0)) < 1e-10
        assert abs(bump.moment(2.0)) < 1e-10
        assert bump.mass == pytest.approx(1.0, abs=1e-10)

    def test_support_is_unit_interval_shifted(self):
        bump = construct_bump([1, 2])
        assert bump(0.5) == 0.0
        assert bump(1.0) == 0.0
        assert bump(2.0) == 0.0
        assert bump(2.5) == 0.0
        grid = np.linspace(1.001, 1.999, 257)
        assert np.max(np.abs(bump(grid))) > 0.0
        assert np.max(np.abs(bump(grid))) <= bump.sup_norm + 1e-9

    def test_nontrivial_band(self):
        bump = construct_bump([2, 3, 7])
        for m in (2, 3, 7):
            assert abs(bump.moment(float(m))) < 1e-10
        assert bump.mass == pytest.approx(1.0, abs=1e-10)

    def test_moment_matches_direct_quadrature(self):
        bump = construct_bump([1, 2])
        direct, _ = quad(lambda u: math.exp(-3.0 * u) * float(bump(u)), 1.0, 2.0,
                         epsabs=1e-13, limit=200)
        assert bump.moment(3.0) == pytest.approx(direct, abs=1e-12)

    def test_rejects_bad_bands(self):
        with pytest.raises(InvalidParameter):
            construct_bump([])
        with pytest.raises(InvalidParameter):
            construct_bump([0, 1])
        with pytest.raises(InvalidParameter):
            construct_bump([1, 99])


class TestHeatKernel:
    def test_coefficients_are_heat_factors(self):
        k = heat_kernel(6, 0.8, 0.5)
        degs = popcounts(6)
        expected = np.exp(-0.8 * degs.astype(float) ** 0.5)
        np.testing.assert_allclose(fwht(k).coeffs, expected, atol=1e-12)

    def test_coefficients_match_subordination_integral(self):
        # e^{-t d^{1/2}} = int e^{-(t^2 d) tau} p_{1/2}(tau) dtau
        t = 0.7
        ev = StableDensityEvaluator(0.5)
        for d in (1, 2, 5):
            target = math.exp(-t * math.sqrt(d))
            val, _ = quad(lambda tau: math.exp(-(t**2) * d * tau) * ev.density(tau),
                          0.0, 1e3, points=[1e-2, 0.1, 1.0, 10.0], limit=300)
            assert val == pytest.approx(target, abs=1e-6)

    def test_convolution_semigroup(self):
        a = heat_kernel(5, 0.3, 1.0)
        b = heat_kernel(5, 0.9, 1.0)
        c = heat_kernel(5, 1.2, 1.0)
        np.testing.assert_allclose(group_convolve(a, b).values, c.values, atol=1e-10)

    def test_convolution_matches_multiplier(self):
        rng = np.random.default_rng(5)
        f = CubeFunction(6, rng.standard_normal(64))
        via_kernel = group_convolve(heat_kernel(6, 0.6, 0.5), f)
        via_mult = apply_multiplier(f, heat(0.6, 0.5))
        np.testing.assert_allclose(via_kernel.values, via_mult.values, atol=1e-10)

    def test_convolution_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            group_convolve(heat_kernel(3, 1.0, 1.0), CubeFunction(4, np.zeros(16)))

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidParameter):
            heat_kernel(0, 1.0, 0.5)
        with pytest.raises(InvalidParameter):
            heat_kernel(4, 0.0, 0.5)


@pytest.fixture(scope="module")
def plan():
    return build_plan(0.5, (1, 2))


class TestModifiedKernel:

    def test_frozen_calibration(self, plan):
        assert plan.t0 == pytest.approx(0.25)
        assert plan.r0 == 16.0
        assert plan.kappa == pytest.approx(6.063770398741225e-04, rel=1e-6)
        assert plan.c0 == pytest.approx(plan.kappa / 2.0)

    def test_zero_mode_drops_by_kappa_t(self, plan):
        t = plan.t0 / 2.0
        spec = fwht(modified_kernel(plan, 8, t))
        assert spec.coeffs[0] == pytest.approx(1.0 - plan.kappa * t, abs=1e-12)

    def test_band_coefficients_untouched(self, plan):
        t = plan.t0
        spec = fwht(modified_kernel(plan, 8, t))
        degs = popcounts(8)
        heat_coeffs = np.exp(-t * degs.astype(float) ** 0.5)
        band = np.isin(degs, [1, 2])
        assert np.max(np.abs(spec.coeffs - heat_coeffs)[band]) < 1e-10

    def test_kernel_nonnegative_so_l1_equals_mass(self, plan):
        t = plan.t0 / 4.0
        k = modified_kernel(plan, 10, t)
        assert k.values.min() >= 0.0
        assert float(np.mean(np.abs(k.values))) == pytest.approx(
            1.0 - plan.kappa * t, abs=1e-12)

    @pytest.mark.parametrize("frac", [1.0, 0.5, 0.25])
    def test_verification_passes(self, plan, frac):
        report = verify_modification(plan, 10, plan.t0 * frac)
        assert report.passed
        assert report.measured <= math.exp(-plan.c0 * plan.t0 * frac)

    def test_generalized_band_plan(self):
        plan = build_plan(0.5, (2, 3, 7))
        report = verify_modification(plan, 10, plan.t0 / 2.0)
        assert report.passed

    def test_time_window_enforced(self, plan):
        with pytest.raises(InvalidParameter):
            modified_kernel(plan, 8, plan.t0 * 1.01)
        with pytest.raises(InvalidParameter):
            modified_kernel(plan, 8, 0.0)

    def test_dimension_cap_enforced(self, plan):
        with pytest.raises(InvalidParameter):
            modified_kernel(plan, 17, plan.t0 / 2.0)


def test_bump_function_is_a_plain_value_object():
    bump = construct_bump([1])
    clone = BumpFunction(band=bump.band, poly_coeffs=bump.poly_coeffs,
                         sup_norm=bump.sup_norm)
    grid = np.linspace(0.5, 2.5, 101)
    np.testing.assert_array_equal(clone(grid), bump(grid))
