"""Observability Service

This module realizes the observability/controllability duality on finite truncations:
Douglas-lemma range inclusions, truncated observability constants, the per-eigenvector
defect scan of the coupled heat-wave system and minimum-norm null controls obtained by
inverting the controllability Gramian.
"""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svd
from scipy.sparse.linalg import cg

from errors import DegenerateOutput, SingularGramian
from logger import app_logger
from models.observability_setup import ObservabilitySetup
from models.results import ModeRatio, NullControlResult, ObservabilityReport, least_squares_line
from models.spectral_system import Side, SpectralSystem, TowerVector
from models.time_signal import GeneralizedInput
from quadrature import gauss_legendre_rule
from .duality_engine import adjoint_final_map, final_state
from .heat_wave import make_heat_wave
from .numerics_config import numerics_config
from .spectral_core import (
    check_system,
    exponential_sobolev_norm,
    extremal_ratio,
    output_expansion,
    output_gram,
    project_hyperbolic,
    semigroup_apply,
    semigroup_matrix,
    tower_norm,
    tower_weights,
)
from .time_function_spaces import trigonometric_weights

MIN_FIT_POINTS = 10
DEFECT_SLOPE_THRESHOLD = -0.5


def douglas_check(left: np.ndarray, right: np.ndarray) -> Tuple[bool, float]:
    """Decide range(L) within range(R) and the best c with ||L* y|| <= c ||R* y||.

    Args:
        left: Matrix L, shape (m, p)
        right: Matrix R, shape (m, q)

    Returns:
        Tuple of (inclusion, best_constant); the constant is inf when inclusion fails
    """
    left = np.atleast_2d(np.asarray(left, dtype=complex))
    right = np.atleast_2d(np.asarray(right, dtype=complex))
    if left.shape[0] != right.shape[0]:
        raise ValueError(f"L and R must share their codomain, got {left.shape} and {right.shape}")

    stacked = svd(np.hstack([right, left]), compute_uv=False)
    if stacked.size == 0 or stacked[0] == 0.0:
        return True, 0.0
    tolerance = float(numerics_config.get('SVD_RTOL')) * float(stacked[0])

    u, sigma, _ = svd(right, full_matrices=False)
    rank_right = int(np.sum(sigma > tolerance))
    rank_stacked = int(np.sum(stacked > tolerance))
    if rank_stacked > rank_right:
        return False, float('inf')
    if rank_right == 0:
        return True, 0.0

    # L = U_r U_r^H L on inclusion, so the optimal factor is Sigma_r^-1 U_r^H L
    factor = (u[:, :rank_right].conj().T @ left) / sigma[:rank_right, None]
    return True, float(np.linalg.norm(factor, 2)) if factor.size else 0.0


def _dual_observation_gram(system: SpectralSystem, positions: Sequence[int], horizon: float,
                           order: int, input_basis: Optional[np.ndarray],
                           sample_count: int) -> np.ndarray:
    """Gram of the observations in (H^order)* realized on the first cosine modes."""
    unit = np.zeros((system.size, len(positions)), dtype=complex)
    unit[list(positions), np.arange(len(positions))] = 1.0
    expansion = output_expansion(system, unit)
    omega = np.arange(sample_count) * np.pi / horizon
    nodes, weights = gauss_legendre_rule(0.0, horizon,
                                         rate=max(expansion.max_rate, float(omega[-1])),
                                         options=numerics_config.quadrature_options())
    values = expansion.evaluate(nodes)
    if input_basis is not None:
        values = values @ np.conj(np.asarray(input_basis, dtype=complex))
    cosines = np.cos(np.outer(nodes, omega))
    pairings = np.einsum('n,nm,nai->mai', weights, cosines, values)
    scale = trigonometric_weights(horizon, omega, order)
    return np.einsum('mai,mbi,m->ab', np.conj(pairings), pairings, 1.0 / scale)


def observability_test(setup: ObservabilitySetup,
                       sample_count: int = 64) -> Tuple[float, ObservabilityReport]:
    """Truncated constant of the observability inequality of a setup.

    The left side uses the X_-N weights on the modes kept by P; the right side is the
    H^-M norm of the observation for M <= 0 and its cosine-realized (H^M)* norm for M > 0.
    The per-mode report holds the ratio of both sides on single eigenvectors of C*.

    Returns:
        Tuple of (constant, report)

    Raises:
        DegenerateOutput: If the observation vanishes on the truncation
    """
    ok, message = setup.validate()
    if not ok:
        raise ValueError(f"invalid observability setup: {message}")
    system = setup.system
    check_system(system)

    labels = setup.output_labels()
    positions = [system.position(k) for k in labels]
    kept = np.zeros(system.size)
    kept[[system.position(k) for k in setup.initial_labels()]] = 1.0

    flow = semigroup_matrix(system, setup.horizon, Side.ADJOINT)[:, positions] * kept[:, None]
    weights = tower_weights(system, -setup.state_index)
    numerator = flow.conj().T @ (weights[:, None] * flow)

    if setup.input_index <= 0:
        denominator = output_gram(system, setup.horizon, -setup.input_index, labels,
                                  setup.input_basis)
    else:
        denominator = _dual_observation_gram(system, positions, setup.horizon, setup.input_index,
                                             setup.input_basis, sample_count)

    constant = extremal_ratio(numerator, denominator, 'observability')
    per_mode = [ModeRatio(k, float(np.sqrt(max(np.real(denominator[i, i]), 0.0))),
                          float(np.sqrt(max(np.real(numerator[i, i]), 0.0))))
                for i, k in enumerate(labels)]
    report = ObservabilityReport(per_mode=per_mode, tower_index=setup.state_index,
                                 horizon=setup.horizon, constant=constant)
    app_logger.debug(f"observability constant over {len(labels)} modes: {constant:.6g}")
    return constant, report


def defect_scan(system: Optional[SpectralSystem] = None, tower_index: int = 0,
                k_range: Iterable[int] = range(5, 41), horizon: float = 1.0) -> ObservabilityReport:
    """Ratios ||B* S*_t phi_k||_{H^N} / ||S*_T phi_k||_{X_-N} over single eigenvectors.

    The numerator is the closed-form H^N norm of b_k e^{mu_k t}; the denominator is
    e^{T Re mu_k} times the X_-N weight of phi_k. The log ratio is fitted against sqrt|k|,
    raw and with log sum_{j<=N} |mu_k|^(2j) removed; the corrected slope decides the
    verdict. Modes absent from the system (failed root searches) and modes off the
    hyperbolic branch are skipped.
    """
    if tower_index < 0:
        raise ValueError(f"defect scans use N >= 0, got {tower_index}")
    k_values = list(k_range)
    if system is None:
        system = make_heat_wave(k_values)

    per_mode: List[ModeRatio] = []
    corrections: List[float] = []
    for k in k_values:
        if not system.has_mode(k):
            app_logger.log_numerics_event('observability', f"mode {k} missing from the scan")
            continue
        unit = project_hyperbolic(system, TowerVector.basis(k, -tower_index, Side.ADJOINT))
        if tower_norm(system, unit) == 0.0:
            app_logger.log_numerics_event('observability',
                                          f"mode {k} is off the hyperbolic branch")
            continue
        mode = system.mode(k)
        mu = mode.eigenvalue
        numerator = float(np.linalg.norm(mode.control_trace)) * exponential_sobolev_norm(
            mu, tower_index, horizon)
        denominator = float(np.exp(horizon * mu.real)) * tower_norm(system, unit)
        per_mode.append(ModeRatio(k, numerator, denominator))
        corrections.append(float(np.log(sum(abs(mu) ** (2 * j) for j in range(tower_index + 1)))))

    report = ObservabilityReport(per_mode=per_mode, tower_index=tower_index, horizon=horizon)
    if per_mode:
        report.constant = max(entry.denominator / entry.numerator for entry in per_mode)
    if len(per_mode) < MIN_FIT_POINTS:
        app_logger.log_numerics_event('observability', 'too few modes for a decay fit',
                                      f"{len(per_mode)} < {MIN_FIT_POINTS}")
        return report

    x = [entry.sqrt_k for entry in per_mode]
    logs = [entry.log_ratio for entry in per_mode]
    report.fit = least_squares_line(x, logs)
    report.corrected_fit = least_squares_line(x, np.subtract(logs, corrections))
    report.verdict = bool(report.corrected_fit.slope <= DEFECT_SLOPE_THRESHOLD)
    return report


def gramian_null_control(system: SpectralSystem, z0: TowerVector, horizon: float,
                         grid: Optional[np.ndarray] = None,
                         solve_tol: Optional[float] = None) -> NullControlResult:
    """Minimum-norm L2 control steering z0 to zero at time T.

    Solves G c = -S_T z0 with G = F_T F_T* assembled in closed form, then sets
    u = F_T* c. With solve_tol the system is solved by conjugate gradients.

    Raises:
        SingularGramian: If the condition estimate exceeds GRAMIAN_CONDITION_LIMIT
    """
    check_system(system)
    if z0.side is not Side.PRIMAL:
        raise ValueError("initial states are primal-side vectors")
    if grid is None:
        grid = np.linspace(0.0, horizon, int(numerics_config.get('DEFAULT_N_GRID')))
    grid = np.asarray(grid, dtype=float)
    if abs(grid[-1] - horizon) > 1e-12 * max(1.0, horizon):
        raise ValueError(f"grid must end at T = {horizon}")

    if system.size == 0:
        raise DegenerateOutput("cannot build a control on an empty truncation")
    gramian = output_gram(system, horizon, 0)
    condition = float(np.linalg.cond(gramian))
    limit = float(numerics_config.get('GRAMIAN_CONDITION_LIMIT'))
    if not np.isfinite(condition) or condition > limit:
        raise SingularGramian(condition)

    target = -semigroup_apply(system, horizon, z0).to_array(system)
    if solve_tol is None:
        coefficients = np.linalg.solve(gramian, target)
    else:
        coefficients, info = cg(gramian, target, rtol=solve_tol, atol=0.0)
        if info != 0:
            app_logger.log_numerics_event('observability', 'conjugate gradients stopped early',
                                          f"info={info}")

    phi = TowerVector.from_array(system, coefficients, 1, Side.ADJOINT)
    control = adjoint_final_map(system, phi, grid)
    result = final_state(system, z0, GeneralizedInput.from_density(control), horizon)
    residual = tower_norm(system, result.state)
    app_logger.debug(f"null control: condition {condition:.3e}, residual {residual:.3e}")
    return NullControlResult(control=control, residual=residual, gramian=gramian,
                             condition=condition, adjoint_coefficients=coefficients)
