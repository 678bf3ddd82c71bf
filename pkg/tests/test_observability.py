"""Tests for range inclusions, observability constants, defect scans and null controls."""

import numpy as np
import pytest

from errors import DegenerateOutput, SingularGramian
from models.observability_setup import ObservabilitySetup
from models.spectral_system import Side, SpectralSystem, TowerVector, zero_vector
from services.duality_engine import adjoint_final_map
from services.heat_wave import PLACEHOLDER_OFFSET, make_heat_wave
from services.model_zoo import make_neumann_heat
from services.numerics_config import numerics_config
from services.observability import (
    defect_scan,
    douglas_check,
    gramian_null_control,
    observability_test,
)

STABLE_MODE_CONSTANT = np.exp(-1.0) / np.sqrt((1.0 - np.exp(-2.0)) / 2.0)


@pytest.fixture(scope="module")
def heat_wave_branch():
    return make_heat_wave(range(5, 41))


class TestDouglas:
    def test_inclusion_with_best_constant(self):
        included, constant = douglas_check(np.diag([1.0, 2.0, 3.0]), np.eye(3))
        assert included
        assert constant == pytest.approx(3.0)

    def test_factorization_through_a_thin_range(self, rng):
        right = rng.normal(size=(4, 2))
        factor = rng.normal(size=(2, 3))
        included, constant = douglas_check(right @ factor, right)
        assert included
        assert np.isfinite(constant) and constant > 0.0

    def test_matches_least_squares(self, rng):
        for trial in range(200):
            right = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
            if trial % 2:
                left = right @ rng.normal(size=(2, 3))
            else:
                left = rng.normal(size=(5, 3))
            solution = np.linalg.lstsq(right, left, rcond=None)[0]
            expected = np.linalg.norm(right @ solution - left) <= 1e-8 * np.linalg.norm(left)
            assert douglas_check(left, right)[0] == expected

    def test_missing_direction(self):
        assert douglas_check([[0.0], [1.0]], [[1.0], [0.0]]) == (False, float('inf'))

    def test_zero_operators(self):
        assert douglas_check(np.zeros((2, 2)), np.zeros((2, 3))) == (True, 0.0)

    def test_codomain_mismatch(self):
        with pytest.raises(ValueError):
            douglas_check(np.eye(2), np.eye(3))


class TestObservabilityInequality:
    def test_stable_mode(self, stable_mode):
        constant, report = observability_test(ObservabilitySetup(stable_mode))
        assert constant == pytest.approx(STABLE_MODE_CONSTANT, rel=1e-10)
        assert report.per_mode[0].ratio == pytest.approx(1.0 / STABLE_MODE_CONSTANT, rel=1e-10)

    def test_weaker_input_norm_raises_the_constant(self, stable_mode):
        strong, _ = observability_test(ObservabilitySetup(stable_mode, input_index=0))
        weak, _ = observability_test(ObservabilitySetup(stable_mode, input_index=1))
        assert weak >= strong * (1.0 - 1e-9)

    def test_projection_to_nothing(self, heat_small):
        constant, _ = observability_test(ObservabilitySetup(heat_small, initial_modes=[]))
        assert constant == 0.0

    def test_positive_state_index_relaxes_the_inequality(self, heat_small):
        plain, _ = observability_test(ObservabilitySetup(heat_small, state_index=0))
        relaxed, _ = observability_test(ObservabilitySetup(heat_small, state_index=1))
        assert relaxed <= plain * (1.0 + 1e-9)

    def test_negative_state_index_tightens_the_inequality(self, heat_small):
        plain, _ = observability_test(ObservabilitySetup(heat_small, state_index=0))
        strict, _ = observability_test(ObservabilitySetup(heat_small, state_index=-1))
        assert strict >= plain * (1.0 - 1e-9)

    def test_invalid_setup(self, heat_small):
        with pytest.raises(ValueError):
            observability_test(ObservabilitySetup(heat_small, output_modes=[99]))
        with pytest.raises(ValueError):
            observability_test(ObservabilitySetup(heat_small, horizon=0.0))


class TestDefectScan:
    def test_ratios_decay_on_the_hyperbolic_branch(self, heat_wave_branch):
        report = defect_scan(heat_wave_branch, 0, range(5, 41))
        assert len(report.per_mode) == 36
        assert report.fit.slope < -0.5
        assert report.verdict is True

    def test_graph_norm_correction(self, heat_wave_branch):
        report = defect_scan(heat_wave_branch, 1, range(5, 41))
        assert report.corrected_fit.slope < report.fit.slope
        assert report.verdict is True

    def test_constant_grows_with_the_truncation(self, heat_wave_branch):
        short = defect_scan(heat_wave_branch, 0, range(5, 9), horizon=3.0)
        full = defect_scan(heat_wave_branch, 0, range(5, 41), horizon=3.0)
        assert full.constant >= 20.0 * short.constant

    def test_observability_constant_grows_with_the_truncation(self, heat_wave_branch):
        setup = ObservabilitySetup(heat_wave_branch, output_modes=range(5, 11))
        short, _ = observability_test(setup)
        full, _ = observability_test(ObservabilitySetup(heat_wave_branch))
        assert full >= 1e2 * short

    def test_too_few_modes_for_a_fit(self, heat_wave_branch):
        report = defect_scan(heat_wave_branch, 0, range(5, 9))
        assert report.fit is None and report.verdict is None
        assert report.constant is not None

    def test_missing_modes_are_skipped(self, heat_wave_branch):
        report = defect_scan(heat_wave_branch, 0, [5, 6, 200])
        assert [entry.k for entry in report.per_mode] == [5, 6]

    def test_parabolic_placeholders_are_skipped(self):
        system = make_heat_wave(range(5, 8), parabolic_placeholders=2)
        report = defect_scan(system, 0, [5, 6, PLACEHOLDER_OFFSET + 1, PLACEHOLDER_OFFSET + 2])
        assert [entry.k for entry in report.per_mode] == [5, 6]

    def test_negative_index(self, heat_wave_branch):
        with pytest.raises(ValueError):
            defect_scan(heat_wave_branch, -1)


class TestNullControl:
    def test_direct_solve_reaches_zero(self, rng):
        system = make_neumann_heat(1)
        z0 = TowerVector.from_array(system, rng.normal(size=2), 0, Side.PRIMAL)
        result = gramian_null_control(system, z0, 1.0)
        assert result.residual < 1e-8
        assert result.control.horizon == pytest.approx(1.0)
        assert np.allclose(result.gramian, result.gramian.conj().T)

    def test_single_mode_gramian(self, stable_mode):
        result = gramian_null_control(stable_mode, TowerVector({0: 1.0}, 0, Side.PRIMAL), 1.0)
        assert result.gramian[0, 0].real == pytest.approx((1.0 - np.exp(-2.0)) / 2.0, rel=1e-12)
        assert result.gramian[0, 0].real == pytest.approx(0.432332, abs=1e-6)

    def test_minimum_norm_among_feasible_controls(self, rng):
        system = make_neumann_heat(2)
        z0 = TowerVector.from_array(system, rng.normal(size=3), 0, Side.PRIMAL)
        grid = np.linspace(0.0, 1.0, 2001)
        best = gramian_null_control(system, z0, 1.0, grid).control.evaluate(grid)[:, 0]
        kernels = np.stack([
            adjoint_final_map(system, TowerVector.basis(k, 1, Side.ADJOINT), grid)
            .evaluate(grid)[:, 0] for k in system.indices])
        weights = np.full(grid.size, grid[1])
        weights[[0, -1]] *= 0.5
        final = kernels.conj() * weights
        projector = np.eye(grid.size) - np.linalg.pinv(final) @ final

        def norm(values):
            return np.sqrt(np.sum(weights * np.abs(values) ** 2))

        for _ in range(100):
            competitor = best + projector @ rng.normal(size=grid.size)
            np.testing.assert_allclose(final @ competitor, final @ best, atol=1e-9)
            assert norm(competitor) >= norm(best) * (1.0 - 1e-12)

    def test_conjugate_gradients(self, rng):
        system = make_neumann_heat(2)
        z0 = TowerVector.from_array(system, rng.normal(size=3), 0, Side.PRIMAL)
        result = gramian_null_control(system, z0, 1.0, solve_tol=1e-12)
        assert result.residual < 1e-6

    def test_condition_limit(self):
        numerics_config.set('GRAMIAN_CONDITION_LIMIT', 1.0)
        system = make_neumann_heat(2)
        with pytest.raises(SingularGramian):
            gramian_null_control(system, TowerVector({0: 1.0}, 0, Side.PRIMAL), 1.0)

    def test_empty_system(self):
        empty = SpectralSystem((), growth_bound=0.0, input_dim=1)
        with pytest.raises(DegenerateOutput):
            gramian_null_control(empty, zero_vector(), 1.0)

    def test_grid_must_end_at_horizon(self):
        system = make_neumann_heat(1)
        with pytest.raises(ValueError):
            gramian_null_control(system, zero_vector(), 1.0, grid=np.linspace(0.0, 0.5, 11))
