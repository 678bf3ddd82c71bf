"""Tests for pairings, Sobolev and dual norms, and the pathological weight."""

import numpy as np
import pytest

from errors import EndpointObstruction, InvalidTowerIndex
from models.spectral_system import TowerVector
from models.time_signal import DualSpaceTag, GeneralizedInput, TimeSignal
from services.duality_engine import curve_split
from services.model_zoo import HEAT_CONSTANT_TRACE
from services.time_function_spaces import (
    dual_norm,
    dual_norm_on_subspace,
    pair,
    sample_alpha_pathological,
    sobolev_norm,
    trigonometric_family,
)


def _identity_signal(horizon=1.0):
    return TimeSignal.from_function(horizon, lambda t: t, derivatives=[np.ones_like])


def _square_signal(horizon=1.0):
    return TimeSignal.from_function(horizon, lambda t: t ** 2, derivatives=[lambda t: 2.0 * t])


def _constant_signal(value, horizon=1.0):
    return TimeSignal.from_function(horizon, lambda t: np.full(np.size(t), value, dtype=complex),
                                    derivatives=[lambda t: np.zeros(np.size(t), dtype=complex)])


def _dirac_exact_norm(t0, horizon):
    return np.sqrt(np.cosh(t0) * np.cosh(horizon - t0) / np.sinh(horizon))


class TestPair:
    def test_density_against_identity(self):
        u = GeneralizedInput.from_density(_constant_signal(1.0))
        assert pair(u, _identity_signal()) == pytest.approx(0.5, abs=1e-13)

    def test_dirac_conjugates_the_test_function(self):
        u = GeneralizedInput.dirac(1.0, 0.3, [2.0j])
        assert pair(u, _constant_signal(1.0 + 1.0j)) == pytest.approx(2.0 + 2.0j)

    def test_derivative_part(self):
        u = GeneralizedInput.derivative_of(_identity_signal(), [1.0])
        assert pair(u, _square_signal()) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_derivative_part_restricted_keeps_boundary_term(self):
        u = GeneralizedInput.derivative_of(_identity_signal(), [1.0])
        expected = 2.0 / 3.0 * 0.125 - 0.5 * 0.25
        assert pair(u, _square_signal(), upper=0.5) == pytest.approx(expected, abs=1e-12)

    def test_restricted_dirac_counts_closed_interval(self):
        u = GeneralizedInput.dirac(1.0, 0.5, [1.0])
        phi = _constant_signal(1.0)
        assert pair(u, phi, upper=0.5) == pytest.approx(1.0)
        assert pair(u, phi, upper=0.49) == pytest.approx(0.0)

    def test_atoms_need_differentiable_tests(self):
        u = GeneralizedInput.dirac(1.0, 0.5, [1.0])
        rough = TimeSignal.from_function(1.0, lambda t: t)
        with pytest.raises(InvalidTowerIndex):
            pair(u, rough)

    def test_zero_trace_rejects_nonzero_traces(self):
        u = GeneralizedInput.dirac(1.0, 0.5, [1.0])
        with pytest.raises(EndpointObstruction) as info:
            pair(u, _constant_signal(1.0), DualSpaceTag.ZERO_TRACE_DUAL)
        assert info.value.trace == pytest.approx(1.0)

    def test_zero_trace_rejects_boundary_atoms(self):
        u = GeneralizedInput.dirac(1.0, 1.0, [1.0])
        sine = TimeSignal.from_function(1.0, lambda t: np.sin(np.pi * t),
                                        derivatives=[lambda t: np.pi * np.cos(np.pi * t)])
        with pytest.raises(EndpointObstruction):
            pair(u, sine, DualSpaceTag.ZERO_TRACE_DUAL)

    def test_dimension_mismatch(self):
        u = GeneralizedInput.dirac(1.0, 0.5, [1.0, 0.0])
        with pytest.raises(ValueError):
            pair(u, _constant_signal(1.0))


class TestSobolevNorm:
    def test_cosine_series(self):
        signal = TimeSignal.from_cosine(1.0, [0.0, 1.0])
        assert sobolev_norm(signal, 0) == pytest.approx(np.sqrt(0.5))
        assert sobolev_norm(signal, 1) == pytest.approx(np.sqrt(0.5 * (1.0 + np.pi ** 2)))

    def test_closed_form_quadrature(self):
        assert sobolev_norm(_identity_signal(), 1) == pytest.approx(np.sqrt(1.0 / 3.0 + 1.0))

    def test_sampled_signal_is_piecewise_linear(self):
        signal = TimeSignal.from_samples(1.0, np.linspace(0.0, 1.0, 11))
        assert sobolev_norm(signal, 1) == pytest.approx(np.sqrt(4.0 / 3.0), rel=1e-12)

    def test_negative_order(self):
        with pytest.raises(InvalidTowerIndex):
            sobolev_norm(_identity_signal(), -1)

    def test_missing_derivative(self):
        with pytest.raises(InvalidTowerIndex):
            sobolev_norm(_identity_signal(), 2)


class TestDualNorm:
    def test_dirac_at_endpoint(self):
        u = GeneralizedInput.dirac(1.0, 1.0, [1.0])
        value = dual_norm(u, 1, n_basis=400)
        assert value == pytest.approx(np.sqrt(1.0 / np.tanh(1.0)), abs=1e-3)
        assert value <= np.sqrt(1.0 / np.tanh(1.0)) + 1e-12

    @pytest.mark.parametrize("t0", [0.25, 0.5, 0.8])
    def test_interior_dirac(self, t0):
        u = GeneralizedInput.dirac(1.0, t0, [1.0])
        assert dual_norm(u, 1, n_basis=400) == pytest.approx(_dirac_exact_norm(t0, 1.0), abs=1e-3)

    def test_monotone_in_basis_size(self):
        u = GeneralizedInput.dirac(1.0, 0.3, [1.0])
        values = [dual_norm(u, 1, n_basis=n) for n in (8, 32, 128)]
        assert values[0] <= values[1] <= values[2]

    @pytest.mark.parametrize("horizon", [0.5, 2.0])
    def test_unit_density(self, horizon):
        u = GeneralizedInput.from_density(_constant_signal(1.0, horizon))
        assert dual_norm(u, 1, n_basis=32) == pytest.approx(np.sqrt(horizon), rel=1e-9)
        assert dual_norm(u, 0) == pytest.approx(np.sqrt(horizon), rel=1e-12)

    def test_order_zero_rejects_atoms(self):
        with pytest.raises(InvalidTowerIndex):
            dual_norm(GeneralizedInput.dirac(1.0, 0.5, [1.0]), 0)

    def test_negative_order(self):
        with pytest.raises(InvalidTowerIndex):
            dual_norm(GeneralizedInput.dirac(1.0, 0.5, [1.0]), -1)

    def test_subspace_norm_matches_diagonal_basis(self):
        u = GeneralizedInput.dirac(1.0, 0.4, [1.0])
        family, _ = trigonometric_family(1.0, 24, 1, DualSpaceTag.FULL_DUAL)
        assert dual_norm_on_subspace(u, family, 1) == pytest.approx(
            dual_norm(u, 1, n_basis=24), rel=1e-8)


class TestPathologicalAlpha:
    def test_centers_follow_van_der_corput(self):
        alpha = sample_alpha_pathological(2.0)
        np.testing.assert_allclose(alpha.centers[:4], [1.0, 0.5, 1.5, 0.25])
        np.testing.assert_allclose(alpha.weights[:3], [0.5, 0.25, 0.125])

    def test_shifted_centers_stay_inside(self):
        alpha = sample_alpha_pathological(1.0, seed=7, n_points=16)
        assert np.all((alpha.centers > 0.0) & (alpha.centers < 1.0))
        assert not np.allclose(alpha.centers, sample_alpha_pathological(1.0, n_points=16).centers)

    def test_empty_and_out_of_range(self):
        assert sample_alpha_pathological(1.0, n_points=0).centers.size == 0
        with pytest.raises(ValueError):
            sample_alpha_pathological(1.0, n_points=33)
        with pytest.raises(ValueError):
            sample_alpha_pathological(1.0, n_points=-1)

    def test_values_are_capped_at_centers(self):
        alpha = sample_alpha_pathological(1.0)
        values, capped = alpha.evaluate([0.5, 0.6])
        assert capped.tolist() == [True, False]
        assert np.all(np.isfinite(values))

    def test_cube_integral_diverges_while_square_integral_stays_bounded(self):
        alpha = sample_alpha_pathological(1.0)
        excisions = [1e-3, 1e-6, 1e-9, 1e-12, 1e-15]
        cubes = [alpha.local_lp_integral(0, 0.01, eps, 3.0) for eps in excisions]
        squares = [alpha.local_lp_integral(0, 0.01, eps, 2.0) for eps in excisions]
        assert all(b > a for a, b in zip(cubes[:-1], cubes[1:]))
        assert cubes[-1] > 100.0 * cubes[0]
        assert squares[-1] < 0.5
        increments = np.diff(squares)
        assert increments[-1] < increments[0]

    def test_derivative_input_splits_into_boundary_term(self, heat_small):
        alpha = sample_alpha_pathological(1.0)
        u = GeneralizedInput.derivative_of(alpha.as_signal(), [1.0])
        times = np.linspace(0.05, 0.95, 6)
        _, second = curve_split(heat_small, u, times, TowerVector.basis(0, 2))
        expected = -alpha(times) * np.conj(HEAT_CONSTANT_TRACE)
        np.testing.assert_allclose(second, expected, rtol=1e-10, atol=1e-12)
