"""Tests for the semigroup, tower norms and the closed-form observation map."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from errors import DegenerateOutput, InvalidTowerIndex
from models.spectral_system import Eigenmode, Side, SpectralSystem, TowerVector
from quadrature import gauss_legendre_rule
from services.heat_wave import make_heat_wave
from services.spectral_core import (
    check_observation_index,
    dual_tower_norm,
    exponential_sobolev_norm,
    extremal_ratio,
    generator_matrix,
    output_expansion,
    output_gram,
    output_trajectory,
    pairing,
    project_hyperbolic,
    project_modes,
    semigroup_apply,
    semigroup_matrix,
    tower_norm,
    tower_weights,
)


def _single(mu):
    return SpectralSystem((Eigenmode(0, mu, [1.0]),), growth_bound=0.0, input_dim=1)


class TestTowerNorms:
    def test_weights_follow_the_graph_norm(self):
        system = _single(-4.0)
        assert tower_weights(system, 0)[0] == pytest.approx(1.0)
        assert tower_weights(system, 1)[0] == pytest.approx(17.0)
        assert tower_weights(system, 2)[0] == pytest.approx(1.0 + 16.0 + 256.0)
        assert tower_weights(system, -1)[0] == pytest.approx(1.0 / 17.0)

    def test_norm_of_a_basis_vector(self):
        system = _single(-4.0)
        assert tower_norm(system, TowerVector.basis(0, 1)) == pytest.approx(np.sqrt(17.0))
        assert tower_norm(system, TowerVector.basis(0, -1)) == pytest.approx(1.0 / np.sqrt(17.0))

    def test_dual_norm_matches_direct_norm(self, heat_small, rng):
        values = rng.normal(size=heat_small.size) + 1j * rng.normal(size=heat_small.size)
        for index in (-2, -1, 0, 1, 2):
            vector = TowerVector.from_array(heat_small, values, index)
            assert dual_tower_norm(heat_small, vector) == pytest.approx(
                tower_norm(heat_small, vector), rel=1e-10)

    def test_dual_norm_of_zero(self, heat_small):
        assert dual_tower_norm(heat_small, TowerVector({}, 1)) == 0.0


class TestSemigroup:
    def test_jordan_block_matches_matrix_exponential(self, jordan_system):
        generator = generator_matrix(jordan_system)
        for t in (0.0, 0.3, 1.7):
            assert_allclose(semigroup_matrix(jordan_system, t), expm(t * generator), atol=1e-12)

    def test_primal_matrix_is_the_adjoint(self, jordan_system):
        adjoint = semigroup_matrix(jordan_system, 0.8, Side.ADJOINT)
        primal = semigroup_matrix(jordan_system, 0.8, Side.PRIMAL)
        assert_allclose(primal, adjoint.conj().T)

    def test_pairing_is_preserved_by_transposed_flows(self, jordan_system, rng):
        size = jordan_system.size
        values = rng.normal(size=size) + 1j * rng.normal(size=size)
        z = TowerVector.from_array(jordan_system, values, 0, Side.PRIMAL)
        phi = TowerVector.from_array(jordan_system, rng.normal(size=size), 0, Side.ADJOINT)
        t = 0.65
        left = pairing(jordan_system, semigroup_apply(jordan_system, t, z), phi)
        right = pairing(jordan_system, z, semigroup_apply(jordan_system, t, phi))
        assert left == pytest.approx(right, rel=1e-12)

    def test_diagonal_flow_uses_conjugate_rates_on_primal_side(self):
        system = SpectralSystem((Eigenmode(0, -1.0 + 2.0j, [1.0]),), growth_bound=0.0,
                                input_dim=1)
        z = semigroup_apply(system, 0.5, TowerVector.basis(0, 0, Side.PRIMAL))
        phi = semigroup_apply(system, 0.5, TowerVector.basis(0, 0, Side.ADJOINT))
        assert z.coefficients[0] == pytest.approx(np.exp(0.5 * (-1.0 - 2.0j)))
        assert phi.coefficients[0] == pytest.approx(np.exp(0.5 * (-1.0 + 2.0j)))

    @pytest.mark.parametrize("side", [Side.ADJOINT, Side.PRIMAL])
    def test_semigroup_law(self, heat_small, jordan_system, wave_small, rng, side):
        for system in (heat_small, jordan_system, wave_small):
            for _ in range(100):
                s, t = rng.uniform(0.0, 2.0, size=2)
                values = rng.normal(size=system.size) + 1j * rng.normal(size=system.size)
                vector = TowerVector.from_array(system, values, 0, side)
                once = semigroup_apply(system, s + t, vector).to_array(system)
                twice = semigroup_apply(system, s, semigroup_apply(system, t, vector))
                assert_allclose(twice.to_array(system), once, rtol=1e-12, atol=1e-14)

    def test_negative_time_is_rejected(self, heat_small):
        with pytest.raises(ValueError):
            semigroup_matrix(heat_small, -0.1)
        with pytest.raises(ValueError):
            semigroup_apply(heat_small, -0.1, TowerVector.basis(0))

    def test_foreign_labels_are_rejected(self, heat_small):
        with pytest.raises(ValueError):
            semigroup_apply(heat_small, 0.1, TowerVector.basis(999))


class TestObservation:
    def test_expansion_matches_traces_times_flow(self, jordan_system, rng):
        phi = rng.normal(size=jordan_system.size) + 1j * rng.normal(size=jordan_system.size)
        expansion = output_expansion(jordan_system, phi)
        for tau in (0.0, 0.4, 2.5):
            expected = jordan_system.traces.T @ (semigroup_matrix(jordan_system, tau) @ phi)
            assert_allclose(expansion.evaluate([tau])[0], expected, atol=1e-12)

    def test_expansion_derivative(self, jordan_system, rng):
        phi = rng.normal(size=jordan_system.size)
        expansion = output_expansion(jordan_system, phi)
        generator = generator_matrix(jordan_system)
        tau = 0.9
        expected = jordan_system.traces.T @ (generator @ semigroup_matrix(jordan_system, tau) @ phi)
        assert_allclose(expansion.derivative().evaluate([tau])[0], expected, atol=1e-12)

    def test_observation_needs_index_one(self, heat_small):
        with pytest.raises(InvalidTowerIndex):
            check_observation_index(TowerVector.basis(0, 0))
        with pytest.raises(InvalidTowerIndex):
            check_observation_index(TowerVector.basis(0, 1, Side.PRIMAL))
        check_observation_index(TowerVector.basis(0, 1))

    def test_trajectory_of_stable_mode(self, stable_mode):
        grid = np.linspace(0.0, 2.0, 21)
        signal = output_trajectory(stable_mode, TowerVector.basis(0, 1), grid)
        assert_allclose(signal.evaluate(grid)[:, 0], np.exp(-grid), atol=1e-12)


class TestOutputGram:
    def test_stable_mode_closed_form(self, stable_mode):
        gram = output_gram(stable_mode, 1.0)
        assert gram[0, 0].real == pytest.approx((1.0 - np.exp(-2.0)) / 2.0, abs=1e-12)

    def test_sobolev_order_adds_derivative_weight(self, stable_mode):
        gram = output_gram(stable_mode, 1.0, order=1)
        assert gram[0, 0].real == pytest.approx(1.0 - np.exp(-2.0), abs=1e-12)
        assert exponential_sobolev_norm(-1.0, 1, 1.0) ** 2 == pytest.approx(gram[0, 0].real)

    def test_closed_form_agrees_with_quadrature(self, heat_small):
        gram = output_gram(heat_small, 0.5, order=1)
        nodes, weights = gauss_legendre_rule(0.0, 0.5, rate=40.0)
        expansion = output_expansion(heat_small, np.eye(heat_small.size))
        values = expansion.evaluate(nodes)
        slopes = expansion.derivative().evaluate(nodes)
        expected = (np.einsum('n,nai,nbi->ab', weights, np.conj(values), values)
                    + np.einsum('n,nai,nbi->ab', weights, np.conj(slopes), slopes))
        assert_allclose(gram, expected, rtol=1e-9, atol=1e-12)

    def test_jordan_gram_is_hermitian_positive(self, jordan_system):
        gram = output_gram(jordan_system, 1.0)
        assert_allclose(gram, gram.conj().T, atol=1e-13)
        assert np.all(np.linalg.eigvalsh(gram) > 0.0)


class TestProjections:
    @pytest.fixture
    def mixed_system(self):
        return make_heat_wave(range(5, 9), parabolic_placeholders=2)

    def test_keeps_only_hyperbolic_modes(self, mixed_system):
        vector = TowerVector({k: 1.0 for k in mixed_system.indices}, 0)
        projected = project_hyperbolic(mixed_system, vector)
        assert [k for k, v in projected.coefficients.items() if v != 0.0] == [5, 6, 7, 8]

    def test_idempotent(self, mixed_system, rng):
        values = rng.normal(size=mixed_system.size) + 1j * rng.normal(size=mixed_system.size)
        vector = TowerVector.from_array(mixed_system, values)
        once = project_hyperbolic(mixed_system, vector)
        twice = project_hyperbolic(mixed_system, once)
        assert_allclose(twice.to_array(mixed_system), once.to_array(mixed_system))

    @pytest.mark.parametrize("side", [Side.ADJOINT, Side.PRIMAL])
    def test_commutes_with_the_semigroup(self, mixed_system, rng, side):
        values = rng.normal(size=mixed_system.size) + 1j * rng.normal(size=mixed_system.size)
        vector = TowerVector.from_array(mixed_system, values, 0, side)
        for t in (0.0, 0.1, 0.7):
            left = project_hyperbolic(mixed_system, semigroup_apply(mixed_system, t, vector))
            right = semigroup_apply(mixed_system, t, project_hyperbolic(mixed_system, vector))
            assert_allclose(left.to_array(mixed_system), right.to_array(mixed_system),
                            rtol=1e-13, atol=1e-15)

    def test_generic_projection(self, heat_small):
        vector = TowerVector({0: 1.0, 1: 2.0, 2: 3.0}, 0)
        projected = project_modes(heat_small, vector, [1])
        assert projected.to_array(heat_small)[:3].tolist() == [0.0, 2.0, 0.0]


class TestExtremalRatio:
    def test_diagonal_pencil(self):
        assert extremal_ratio(np.diag([1.0, 4.0]), np.eye(2)) == pytest.approx(2.0)

    def test_scaled_gram(self):
        assert extremal_ratio(np.eye(2), np.diag([4.0, 1.0])) == pytest.approx(1.0)

    def test_vanishing_gram(self):
        with pytest.raises(DegenerateOutput):
            extremal_ratio(np.eye(2), np.zeros((2, 2)))
