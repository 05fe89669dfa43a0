import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cube_spectral import (
    CubeFunction,
    InvalidInput,
    InvalidParameter,
    Spectrum,
    apply_multiplier,
    degree_projection,
    dirichlet_form,
    expectation,
    fractional,
    fwht,
    gradient_sq,
    heat,
    ifwht,
    laplacian,
    lp_norm,
    partial_gradient,
)
from cube_spectral.cube import MAX_DIMENSION, apply_multiplier_spectrum, popcounts


def brute_force_coeffs(f: CubeFunction) -> np.ndarray:
    """O(4^n) character sums, the independent transform oracle."""
    size = f.values.size
    out = np.zeros(size)
    for s in range(size):
        signs = np.array([(-1) ** bin(s & m).count("1") for m in range(size)])
        out[s] = float(np.mean(f.values * signs))
    return out


def finite_values(n):
    return arrays(np.float64, 1 << n,
                  elements=st.floats(-100, 100, allow_nan=False, width=64))


class TestTransform:
    def test_frozen_small_case(self):
        # hand-computed butterfly of [3, 1, 1, -1]
        spec = fwht(CubeFunction(2, [3.0, 1.0, 1.0, -1.0]))
        np.testing.assert_allclose(spec.coeffs, [1.0, 1.0, 1.0, 0.0], atol=1e-15)

    def test_matches_character_sum_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            f = CubeFunction(5, rng.standard_normal(32))
            np.testing.assert_allclose(fwht(f).coeffs, brute_force_coeffs(f),
                                       atol=1e-13)

    def test_constant_has_only_zero_mode(self):
        spec = fwht(CubeFunction(4, np.full(16, 2.5)))
        assert spec.coeffs[0] == pytest.approx(2.5)
        assert np.max(np.abs(spec.coeffs[1:])) < 1e-15

    def test_single_coordinate(self):
        # x_1 is +1 on even masks, -1 on odd ones
        values = np.array([1.0 if m % 2 == 0 else -1.0 for m in range(16)])
        spec = fwht(CubeFunction(4, values))
        expected = np.zeros(16)
        expected[1] = 1.0
        np.testing.assert_allclose(spec.coeffs, expected, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(finite_values(5))
    def test_round_trip(self, values):
        f = CubeFunction(5, values)
        np.testing.assert_allclose(ifwht(fwht(f)).values, f.values,
                                   atol=1e-10, rtol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(finite_values(5))
    def test_parseval(self, values):
        f = CubeFunction(5, values)
        lhs = float(np.mean(f.values**2))
        rhs = float(np.sum(fwht(f).coeffs ** 2))
        assert lhs == pytest.approx(rhs, abs=1e-8, rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(finite_values(4), finite_values(4), st.floats(-5, 5))
    def test_linearity(self, a, b, c):
        combined = fwht(CubeFunction(4, a + c * b))
        expected = fwht(CubeFunction(4, a)).coeffs + c * fwht(CubeFunction(4, b)).coeffs
        np.testing.assert_allclose(combined.coeffs, expected, atol=1e-8)


class TestMultipliers:
    def test_laplacian_eigenvalues(self):
        assert list(laplacian().factors(4)) == [0.0, -1.0, -2.0, -3.0, -4.0]

    def test_fractional_reduces_to_laplacian_at_one(self):
        np.testing.assert_allclose(fractional(1.0).factors(6), laplacian().factors(6))

    def test_heat_at_zero_time_is_identity(self):
        np.testing.assert_allclose(heat(0.0).factors(5), np.ones(6))

    @settings(max_examples=25, deadline=None)
    @given(finite_values(4), st.floats(0.01, 3.0), st.floats(0.01, 3.0),
           st.floats(0.1, 1.0))
    def test_semigroup_law(self, values, t1, t2, gamma):
        f = CubeFunction(4, values)
        both = apply_multiplier(apply_multiplier(f, heat(t1, gamma)), heat(t2, gamma))
        once = apply_multiplier(f, heat(t1 + t2, gamma))
        np.testing.assert_allclose(both.values, once.values, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(finite_values(4), st.floats(0.01, 5.0),
           st.sampled_from([1.0, 2.0, np.inf]))
    def test_heat_is_a_contraction(self, values, t, p):
        f = CubeFunction(4, values)
        assert lp_norm(apply_multiplier(f, heat(t)), p) <= lp_norm(f, p) + 1e-9

    def test_degree_projection_idempotent(self):
        rng = np.random.default_rng(3)
        f = CubeFunction(5, rng.standard_normal(32))
        proj = degree_projection([1, 3])
        once = apply_multiplier(f, proj)
        twice = apply_multiplier(once, proj)
        np.testing.assert_allclose(once.values, twice.values, atol=1e-12)
        live = np.abs(fwht(once).coeffs) > 1e-12
        assert set(popcounts(5)[live]) <= {1, 3}

    def test_spectrum_side_action_matches(self):
        rng = np.random.default_rng(4)
        f = CubeFunction(5, rng.standard_normal(32))
        via_function = fwht(apply_multiplier(f, heat(0.7, 0.5)))
        via_spectrum = apply_multiplier_spectrum(fwht(f), heat(0.7, 0.5))
        np.testing.assert_allclose(via_function.coeffs, via_spectrum.coeffs, atol=1e-12)

    def test_bad_multiplier_parameters(self):
        with pytest.raises(InvalidParameter):
            fractional(0.0)
        with pytest.raises(InvalidParameter):
            fractional(1.5)
        with pytest.raises(InvalidParameter):
            heat(-1.0)


class TestCalculus:
    def test_partial_gradient_of_coordinate(self):
        values = np.array([1.0 if m % 2 == 0 else -1.0 for m in range(8)])
        g = partial_gradient(CubeFunction(3, values), 1)
        np.testing.assert_allclose(g.values, np.ones(8))
        h = partial_gradient(CubeFunction(3, values), 2)
        np.testing.assert_allclose(h.values, np.zeros(8))

    def test_dirichlet_form_equals_spectral_sum(self):
        rng = np.random.default_rng(9)
        f = CubeFunction(6, rng.standard_normal(64))
        spec = fwht(f)
        spectral = float(np.sum(spec.coeffs**2 * spec.degrees()))
        assert dirichlet_form(f, f) == pytest.approx(spectral, abs=1e-10)

    def test_dirichlet_form_is_minus_laplacian_pairing(self):
        rng = np.random.default_rng(10)
        f = CubeFunction(5, rng.standard_normal(32))
        g = CubeFunction(5, rng.standard_normal(32))
        pairing = -float(np.mean(f.values * apply_multiplier(g, laplacian()).values))
        assert dirichlet_form(f, g) == pytest.approx(pairing, abs=1e-10)

    def test_gradient_sq_nonnegative_and_zero_for_constants(self):
        rng = np.random.default_rng(12)
        f = CubeFunction(4, rng.standard_normal(16))
        assert gradient_sq(f).values.min() >= 0.0
        c = CubeFunction(4, np.full(16, 3.0))
        assert np.max(gradient_sq(c).values) == 0.0

    def test_expectation_and_lp(self):
        f = CubeFunction(2, [1.0, -1.0, 3.0, -3.0])
        assert expectation(f) == 0.0
        assert lp_norm(f, 1.0) == pytest.approx(2.0)
        assert lp_norm(f, 2.0) == pytest.approx(np.sqrt(5.0))
        assert lp_norm(f, np.inf) == 3.0
        with pytest.raises(InvalidParameter):
            lp_norm(f, 0.5)

    def test_lp_norm_monotone_in_p(self):
        rng = np.random.default_rng(13)
        f = CubeFunction(5, rng.standard_normal(32))
        norms = [lp_norm(f, p) for p in (1.0, 1.5, 2.0, 4.0, np.inf)]
        assert all(a <= b + 1e-12 for a, b in zip(norms[:-1], norms[1:]))


class TestValidationAndSerialization:
    def test_dimension_limits(self):
        with pytest.raises(InvalidInput):
            CubeFunction(0, [])
        with pytest.raises(InvalidInput):
            CubeFunction(MAX_DIMENSION + 1, np.zeros(4))

    def test_value_shape_and_finiteness(self):
        with pytest.raises(InvalidInput):
            CubeFunction(3, np.zeros(7))
        with pytest.raises(InvalidInput):
            CubeFunction(2, [1.0, np.nan, 0.0, 0.0])

    def test_values_are_immutable(self):
        f = CubeFunction(2, [1.0, 2.0, 3.0, 4.0])
        with pytest.raises(ValueError):
            f.values[0] = 9.0

    def test_binary_round_trip(self):
        rng = np.random.default_rng(21)
        f = CubeFunction(6, rng.standard_normal(64))
        back = CubeFunction.from_bytes(f.to_bytes())
        assert back.n == 6
        np.testing.assert_array_equal(back.values, f.values)
        spec = fwht(f)
        back_spec = Spectrum.from_bytes(spec.to_bytes())
        np.testing.assert_array_equal(back_spec.coeffs, spec.coeffs)

    def test_binary_header_layout(self):
        f = CubeFunction(1, [1.0, 2.0])
        data = f.to_bytes()
        assert data[:4] == b"CUBE"
        assert len(data) == 12 + 16

    def test_binary_rejects_corruption(self):
        f = CubeFunction(3, np.arange(8.0))
        data = f.to_bytes()
        with pytest.raises(InvalidInput):
            CubeFunction.from_bytes(b"XUBE" + data[4:])
        with pytest.raises(InvalidInput):
            CubeFunction.from_bytes(data[:-8])

    def test_json_round_trip(self):
        f = CubeFunction(3, np.arange(8.0))
        back = CubeFunction.from_json(f.to_json())
        np.testing.assert_array_equal(back.values, f.values)
        obj = json.loads(f.to_json())
        assert obj["n"] == 3 and len(obj["values"]) == 8

    def test_dimension_mismatch_raises(self):
        f = CubeFunction(2, np.zeros(4))
        g = CubeFunction(3, np.zeros(8))
        with pytest.raises(InvalidInput):
            dirichlet_form(f, g)
