"""Tests for the toy, Neumann heat and Neumann wave systems."""

import numpy as np
import pytest

from errors import EndpointObstruction
from models.spectral_system import Side, TowerVector, zero_vector
from models.time_signal import DualSpaceTag, GeneralizedInput, TimeSignal
from services.duality_engine import adjoint_final_map, final_state
from services.model_zoo import (
    HEAT_CONSTANT_TRACE,
    heat_psi,
    heat_psi_norm,
    heat_psi_tail_bound,
    heat_psi_vector,
    make_neumann_heat,
    make_neumann_wave,
    make_toy,
    obstruction_check,
    wave_frequency,
)
from services.spectral_core import check_system, pairing


class TestToy:
    def test_single_integrator(self):
        system = make_toy()
        assert system.size == 1
        assert system.eigenvalues[0] == 0
        assert system.traces[0, 0] == 1


class TestNeumannHeat:
    def test_spectrum_and_traces(self):
        system = make_neumann_heat(4)
        check_system(system)
        np.testing.assert_allclose(system.eigenvalues, [0, -1, -4, -9, -16])
        assert system.mode(0).control_trace[0] == pytest.approx(HEAT_CONSTANT_TRACE)
        assert system.mode(3).control_trace[0] == pytest.approx(-np.sqrt(2.0 / np.pi))

    def test_needs_a_cosine_mode(self):
        with pytest.raises(ValueError):
            make_neumann_heat(0)

    def test_psi_norm_closed_form(self):
        n = np.arange(201)
        values = np.where(n == 0, 1.0 / np.pi, 2.0 / np.pi) * np.exp(-2.0 * n ** 2)
        assert obstruction_check(1.0, 200) == pytest.approx(np.sqrt(np.sum(values)), rel=1e-12)
        assert obstruction_check(1.0, 200) > 0.6

    def test_series_and_quadrature_agree(self):
        assert heat_psi_norm(0.1, 20, 'series') == pytest.approx(
            heat_psi_norm(0.1, 20, 'quadrature'), rel=1e-10)

    def test_series_and_quadrature_agree_at_full_truncation(self):
        series = heat_psi_norm(1.0, 200, 'series')
        assert series == pytest.approx(heat_psi_norm(1.0, 200, 'quadrature'), rel=1e-9)
        assert series > 0.3

    def test_endpoint_value_of_the_adjoint_map_pairs_with_psi(self, rng):
        system = make_neumann_heat(20)
        psi = heat_psi_vector(1.0, 20)
        grid = np.linspace(0.0, 1.0, 5)
        for _ in range(10):
            values = rng.normal(size=system.size) + 1j * rng.normal(size=system.size)
            phi = TowerVector.from_array(system, values, 1, Side.ADJOINT)
            at_zero = adjoint_final_map(system, phi, grid).evaluate(np.array([0.0]))[0, 0]
            assert at_zero == pytest.approx(np.conj(pairing(system, psi, phi)), rel=1e-9)

    def test_zero_trace_dual_is_obstructed(self):
        system = make_neumann_heat(10)
        u = GeneralizedInput.from_density(TimeSignal.from_samples(1.0, np.ones(9)))
        with pytest.raises(EndpointObstruction):
            final_state(system, zero_vector(0, Side.PRIMAL), u, tag=DualSpaceTag.ZERO_TRACE_DUAL)

    def test_unknown_norm_method(self):
        with pytest.raises(ValueError):
            heat_psi_norm(1.0, 5, 'simpson')

    def test_tail_bound_shrinks(self):
        assert heat_psi_tail_bound(0.1, 5) > heat_psi_tail_bound(0.1, 10) > 0.0
        assert heat_psi_tail_bound(1.0, 200) < 1e-300

    def test_psi_samples(self):
        result = heat_psi(0.5, 50)
        assert result.x[0] == 0.0 and result.x[-1] == pytest.approx(np.pi)
        assert len(result.rows()) == result.x.size
        # psi is most negative at the control point
        assert np.argmin(result.values) == 0

    def test_psi_needs_positive_horizon(self):
        with pytest.raises(ValueError):
            heat_psi(0.0, 10)


class TestNeumannWave:
    def test_spectrum(self):
        system = make_neumann_wave(3)
        check_system(system)
        assert system.indices == list(range(-4, 4))
        np.testing.assert_allclose(system.eigenvalues, 1j * (np.arange(-4, 4) + 0.5))
        np.testing.assert_allclose(np.abs(system.traces[:, 0]), 1.0 / np.sqrt(np.pi))

    def test_frequency(self):
        assert wave_frequency(0) == 0.5
        assert wave_frequency(-1) == 0.5
        assert wave_frequency(-3) == 2.5
