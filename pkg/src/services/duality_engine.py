"""Duality Engine Service

This module computes the final-state map F_T, its adjoint F_T*, the state curve F and
the combined map Xi_T for generalized inputs. Extensions to distributional inputs are
evaluated through pairing formulas: the k-th primal coefficient of F_T u is the pairing
of u against s -> B* S*_{T-s} phi_k.

It also holds the regularity probes for state curves tested against W_k vectors, the
independent Duhamel oracle and the truncated admissibility and extension constants.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, null_space

from errors import InsufficientSupport, InvalidTowerIndex
from logger import app_logger
from models.results import CurveSample, FinalStateResult, JumpEstimate, RegularityReport
from models.spectral_system import Side, SpectralSystem, TowerVector
from models.time_signal import DualSpaceTag, GeneralizedInput, TimeSignal
from .numerics_config import numerics_config
from .spectral_core import (
    check_observation_index,
    check_system,
    extremal_ratio,
    generator_matrix,
    output_gram,
    output_signal,
    semigroup_apply,
    semigroup_matrix,
    tower_norm,
    tower_weights,
)
from .time_function_spaces import pair, whitened_quadratic_form

# Central difference stencils: offsets and weights for derivatives of order 1..3
CENTRAL_STENCILS: Dict[int, Tuple[Tuple[int, ...], Tuple[float, ...]]] = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}

RICHARDSON_LEVELS = 3
JUMP_STEP = 1e-4


def _unit_family(system: SpectralSystem) -> np.ndarray:
    return np.eye(system.size, dtype=complex)


def adjoint_final_map(system: SpectralSystem, phi: TowerVector, grid: np.ndarray) -> TimeSignal:
    """F_T* phi as the signal s -> B* S*_{T-s} phi on [0, T], T = grid[-1]."""
    check_observation_index(phi)
    grid = np.asarray(grid, dtype=float)
    return output_signal(system, phi.to_array(system), float(grid[-1]), grid.size, reflected=True)


def final_state_kernels(system: SpectralSystem, horizon: float) -> TimeSignal:
    """Family s -> B* S*_{T-s} phi_k of every unit adjoint vector, family axis first."""
    n_grid = int(numerics_config.get('DEFAULT_N_GRID'))
    return output_signal(system, _unit_family(system), horizon, n_grid, reflected=True)


def _input_index(u: GeneralizedInput, input_index: Optional[int]) -> int:
    if input_index is None:
        return int(u.dual_index)
    if input_index <= u.dual_index:
        return int(input_index)
    density = u.density
    if u.is_regular and (density is None or density.smoothness_index >= input_index
                         or density.cosine_coefficients is not None):
        return int(input_index)
    raise InvalidTowerIndex(
        f"input represented at level {u.dual_index} cannot be read in U_{input_index}")


def extension_constant(system: SpectralSystem, horizon: float, order: int) -> float:
    """Norm of F_T* from X_order to H^order(0, T; U) on the truncation (order >= 0)."""
    if order < 0:
        raise InvalidTowerIndex(f"extension constants are defined for order >= 0, got {order}")
    if system.size == 0:
        return 0.0
    gram = output_gram(system, horizon, order)
    weights = np.sqrt(tower_weights(system, order))
    scaled = gram / weights[:, None] / weights[None, :]
    largest = float(np.max(np.linalg.eigvalsh(0.5 * (scaled + scaled.conj().T))))
    return float(np.sqrt(max(largest, 0.0)))


def final_state(system: SpectralSystem, z0: TowerVector, u: GeneralizedInput,
                horizon: Optional[float] = None,
                tag: DualSpaceTag = DualSpaceTag.FULL_DUAL,
                input_index: Optional[int] = None) -> FinalStateResult:
    """Generalized final state Xi_T(z0, u) in primal coefficients.

    Args:
        system: Spectral system
        z0: Initial state, primal side, tower index N
        u: Generalized input
        horizon: Final time, defaults to the input horizon
        tag: Dual space the input is paired in
        input_index: Level M the input is read in, defaults to its representation level

    Returns:
        FinalStateResult with result_index = min(0, N, M)

    Raises:
        EndpointObstruction: If tag is zero-trace and a kernel has a nonzero endpoint trace
    """
    check_system(system)
    ok, message = u.validate()
    if not ok:
        raise ValueError(f"invalid input: {message}")
    if z0.side is not Side.PRIMAL:
        raise ValueError("initial states are primal-side vectors")
    if not z0.belongs_to(system):
        raise ValueError("initial state has coefficients on modes outside the system")
    horizon = float(u.horizon if horizon is None else horizon)
    if abs(horizon - u.horizon) > 1e-12 * max(1.0, horizon):
        raise ValueError(f"input horizon {u.horizon} differs from requested horizon {horizon}")

    level = _input_index(u, input_index)
    result_index = min(0, z0.tower_index, level)

    flow = semigroup_apply(system, horizon, z0).to_array(system)
    forced = np.zeros(system.size, dtype=complex)
    if system.size:
        forced = np.asarray(pair(u, final_state_kernels(system, horizon), tag)).reshape(-1)

    state = TowerVector.from_array(system, flow + forced, result_index, Side.PRIMAL)
    bound = extension_constant(system, horizon, -result_index) if system.size else 0.0
    return FinalStateResult(state, result_index, bound)


def duhamel_oracle(system: SpectralSystem, z0: TowerVector, u: GeneralizedInput,
                   grid: Optional[np.ndarray] = None) -> TowerVector:
    """Final state of the primal ODE by exact exponential-integrator time stepping.

    The forcing (u(t), b_k)_U is interpolated linearly between grid nodes, which makes the
    scheme exact for sampled densities on their own grid.
    """
    if not u.is_regular:
        raise InvalidTowerIndex("the Duhamel oracle takes L2 densities only")
    if z0.side is not Side.PRIMAL:
        raise ValueError("initial states are primal-side vectors")
    density = u.density
    if grid is None:
        grid = density.grid if density is not None else np.array([0.0, u.horizon])
    grid = np.asarray(grid, dtype=float)

    size = system.size
    state = z0.to_array(system)
    if density is None:
        forcing = np.zeros((grid.size, size), dtype=complex)
    else:
        forcing = density.evaluate(grid) @ np.conj(system.traces).T
    primal_generator = generator_matrix(system).conj().T
    identity = np.eye(size)

    steps = np.diff(grid)
    cache: Dict[float, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for i, step in enumerate(steps):
        key = round(float(step), 15)
        if key not in cache:
            augmented = np.zeros((3 * size, 3 * size), dtype=complex)
            augmented[:size, :size] = primal_generator * step
            augmented[:size, size:2 * size] = identity
            augmented[size:2 * size, 2 * size:] = identity
            blocks = expm(augmented)
            cache[key] = (blocks[:size, :size], blocks[:size, size:2 * size],
                          blocks[:size, 2 * size:])
        propagator, phi1, phi2 = cache[key]
        state = (propagator @ state + step * (phi1 @ forcing[i])
                 + step * (phi2 @ (forcing[i + 1] - forcing[i])))

    return TowerVector.from_array(system, state, min(0, z0.tower_index), Side.PRIMAL)


def _check_probes(u: GeneralizedInput, probes: Sequence[TowerVector]) -> None:
    needed = 2 if u.dual_index < 0 else 1
    for probe in probes:
        check_observation_index(probe)
        if probe.tower_index < needed:
            raise InvalidTowerIndex(
                f"state curves of U_{u.dual_index} inputs need probes in X_{needed}")


def curve_kernel(system: SpectralSystem, coefficients: np.ndarray, t: float) -> TimeSignal:
    """Kernel s -> B* S*_{t-s} phi on [0, t]."""
    return output_signal(system, coefficients, float(t), 2, reflected=True)


def curve_pairings(system: SpectralSystem, u: GeneralizedInput, coefficients: np.ndarray,
                   times: Sequence[float]) -> np.ndarray:
    """Pairings (F u(t), phi) at arbitrary times, atoms counted on the closed interval [0, t].

    Args:
        coefficients: Adjoint coefficients, shape (n_modes,) or (n_modes, n_probes)

    Returns:
        Array of shape (len(times),) + probe axes
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    coefficients = np.asarray(coefficients, dtype=complex)
    values = np.zeros((times.size,) + coefficients.shape[1:], dtype=complex)
    for i, t in enumerate(times):
        values[i] = pair(u, curve_kernel(system, coefficients, t), upper=t)
    return values


def constant_kernel(system: SpectralSystem, coefficients: np.ndarray, horizon: float) -> TimeSignal:
    """Time-independent kernel s -> B* phi."""
    value = np.tensordot(coefficients, system.traces, axes=(0, 0))

    def evaluate(s: np.ndarray) -> np.ndarray:
        return np.broadcast_to(value, (np.size(s),) + value.shape)

    def slope(s: np.ndarray) -> np.ndarray:
        return np.zeros((np.size(s),) + value.shape, dtype=complex)

    return TimeSignal.from_function(horizon, evaluate, n_grid=2, derivatives=[slope])


def split_pairings(system: SpectralSystem, u: GeneralizedInput, coefficients: np.ndarray,
                   times: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """F^1 and F^2 pairings: F^2 u(t) = int_0^t B u, F^1 = F - F^2."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    coefficients = np.asarray(coefficients, dtype=complex)
    kernel = constant_kernel(system, coefficients, u.horizon)
    second = np.zeros((times.size,) + coefficients.shape[1:], dtype=complex)
    for i, t in enumerate(times):
        second[i] = pair(u, kernel, upper=t)
    full = curve_pairings(system, u, coefficients, times)
    return full - second, second


def state_curve(system: SpectralSystem, u: GeneralizedInput, grid: Sequence[float],
                probes: Sequence[TowerVector], labels: Optional[Sequence[str]] = None,
                with_split: bool = False) -> CurveSample:
    """Pairings of the state curve t -> F u(t) against adjoint probes on a grid."""
    check_system(system)
    _check_probes(u, probes)
    labels = list(labels) if labels is not None else [f"probe{i}" for i in range(len(probes))]
    if len(labels) != len(probes):
        raise ValueError("one label per probe is required")
    grid = np.asarray(grid, dtype=float)
    coefficients = np.stack([probe.to_array(system) for probe in probes], axis=1)

    if with_split:
        first, second = split_pairings(system, u, coefficients, grid)
        full = first + second
        split = ({label: first[:, i] for i, label in enumerate(labels)},
                 {label: second[:, i] for i, label in enumerate(labels)})
    else:
        full = curve_pairings(system, u, coefficients, grid)
        split = None
    return CurveSample(grid, {label: full[:, i] for i, label in enumerate(labels)}, split)


def curve_split(system: SpectralSystem, u: GeneralizedInput, grid: Sequence[float],
                probe: TowerVector) -> Tuple[np.ndarray, np.ndarray]:
    """F^1 and F^2 pairing sequences of the state curve against one probe.

    F^2 uses the time-independent kernel B* phi, F^1 the kernel B*(S*_{t-s} - 1) phi.
    """
    check_system(system)
    check_observation_index(probe)
    if probe.tower_index < 2:
        raise InvalidTowerIndex("curve splits need probes in X_2")
    return split_pairings(system, u, probe.to_array(system), np.asarray(grid, dtype=float))


def w_constraint_matrix(system: SpectralSystem, order: int,
                        positions: Optional[Sequence[int]] = None) -> np.ndarray:
    """Rows of B* A*^i, i < order, acting on adjoint coefficients (restricted to positions)."""
    positions = list(range(system.size)) if positions is None else list(positions)
    generator = generator_matrix(system)[np.ix_(positions, positions)]
    traces = system.traces[positions].T
    rows = []
    power = np.eye(len(positions), dtype=complex)
    for _ in range(order):
        rows.append(traces @ power)
        power = power @ generator
    return np.vstack(rows) if rows else np.zeros((0, len(positions)), dtype=complex)


def w_residual(system: SpectralSystem, phi: TowerVector, order: int) -> float:
    """Largest |B* A*^i phi| over i < order."""
    rows = w_constraint_matrix(system, order)
    return float(np.max(np.abs(rows @ phi.to_array(system)))) if rows.size else 0.0


def construct_Wk_vector(system: SpectralSystem, k: int, support: Sequence[int],
                        tower_index: Optional[int] = None) -> TowerVector:
    """Unit adjoint vector on the support with B* A*^i phi = 0 for i < k.

    Args:
        system: Spectral system
        k: Number of vanishing observations
        support: Mode labels, closed under Jordan chains
        tower_index: Label of the result, defaults to k + 1

    Raises:
        InsufficientSupport: If the constraints only admit the zero vector
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    labels = list(dict.fromkeys(int(i) for i in support))
    if not labels:
        raise InsufficientSupport("empty support")
    positions = [system.position(i) for i in labels]
    for label in labels:
        missing = [m for m in system.mode(label).chain if m not in labels]
        if missing:
            raise ValueError(
                f"support must contain the whole chain of mode {label}, missing {missing}")
    tower_index = k + 1 if tower_index is None else tower_index

    if not np.any(system.traces[positions]):
        return TowerVector.basis(labels[0], tower_index, Side.ADJOINT)

    constraints = w_constraint_matrix(system, k, positions)
    basis = null_space(constraints, rcond=float(numerics_config.get('SVD_RTOL')))
    if basis.shape[1] == 0:
        raise InsufficientSupport(
            f"{len(labels)} modes cannot satisfy {constraints.shape[0]} W_{k} constraints")
    vector = basis[:, 0] / np.linalg.norm(basis[:, 0])
    lead = np.flatnonzero(np.abs(vector) > 1e-12)[0]
    vector = vector * np.exp(-1j * np.angle(vector[lead]))
    return TowerVector(dict(zip(labels, vector)), tower_index, Side.ADJOINT)


def richardson(estimates: Sequence[complex]) -> complex:
    """Extrapolate estimates at steps h, h/2, h/4, ... with error expansion in powers of h."""
    table = [complex(e) for e in estimates]
    power = 1
    while len(table) > 1:
        factor = 2.0 ** power
        table = [(factor * fine - coarse) / (factor - 1.0)
                 for coarse, fine in zip(table[:-1], table[1:])]
        power += 1
    return table[0]


def jump_estimate(curve: Callable[[np.ndarray], np.ndarray], t0: float, order: int = 0,
                  step: float = JUMP_STEP, levels: int = RICHARDSON_LEVELS) -> complex:
    """Jump of the order-th derivative of a curve across t0.

    One-sided difference quotients from either side are extrapolated to zero step by
    Richardson with ratio 2; the jump is right limit minus left limit.
    """
    def one_sided(direction: float, h: float) -> complex:
        offsets = np.arange(1, order + 2)
        values = np.asarray(curve(t0 + direction * h * offsets))
        differences = np.diff(values, n=order) if order else values[:1]
        return complex(differences[0]) / (direction * h) ** order

    right = richardson([one_sided(1.0, step / 2 ** i) for i in range(levels)])
    left = richardson([one_sided(-1.0, step / 2 ** i) for i in range(levels)])
    return right - left


def _difference(curve: Callable[[np.ndarray], np.ndarray], times: np.ndarray,
                order: int, h: float) -> np.ndarray:
    offsets, weights = CENTRAL_STENCILS[order]
    total = np.zeros(times.size, dtype=complex)
    for offset, weight in zip(offsets, weights):
        total += weight * curve(times + offset * h)
    return total / h ** order


def _observed_order(estimates: List[np.ndarray]) -> float:
    coarse = float(np.max(np.abs(estimates[0] - estimates[1]))) if estimates[0].size else 0.0
    fine = float(np.max(np.abs(estimates[1] - estimates[2]))) if estimates[0].size else 0.0
    if fine <= 1e-13 or coarse <= 1e-13:
        return float('inf')
    return float(np.log2(coarse / fine))


def regularity_probe(system: SpectralSystem, u: GeneralizedInput, probe: TowerVector,
                     grid: Sequence[float], order: int,
                     jump_times: Optional[Sequence[float]] = None) -> RegularityReport:
    """Finite-difference regularity diagnostics of t -> (F u(t), phi).

    Centered derivative estimates of order 1..order are computed at steps h, h/2, h/4 with
    h the grid spacing, on grid times whose stencils stay inside (0, T) and away from the
    atoms; their observed convergence orders are reported. At every atom (or requested
    time) the jumps of derivatives 0..order are extrapolated from one-sided quotients, and
    the centered estimates there get their own convergence orders.
    """
    if order < 0 or order > max(CENTRAL_STENCILS):
        raise ValueError(f"order must lie in [0, {max(CENTRAL_STENCILS)}], got {order}")
    check_system(system)
    _check_probes(u, [probe])
    grid = np.asarray(grid, dtype=float)
    coefficients = probe.to_array(system)

    needed = order - u.dual_index
    residual = w_residual(system, probe, needed)
    scale = float(np.max(np.abs(system.traces))) if system.size else 0.0
    in_w = residual <= 1e-10 * max(scale, 1.0)
    if not in_w:
        app_logger.log_numerics_event(
            'duality_engine', f"probe is not in W_{needed}", f"residual {residual:.3e}")

    def curve(times: np.ndarray) -> np.ndarray:
        return curve_pairings(system, u, coefficients, times)

    values = curve(grid)
    h = float(grid[1] - grid[0]) if grid.size > 1 else 0.0
    atoms = [atom.t0 for atom in u.atoms]
    jump_times = list(atoms if jump_times is None else jump_times)

    estimates: Dict[int, np.ndarray] = {}
    orders: Dict[int, float] = {}
    atom_orders: Dict[int, float] = {}
    for j in range(1, order + 1):
        reach = max(abs(o) for o in CENTRAL_STENCILS[j][0]) * h
        interior = grid[(grid - reach > 0.0) & (grid + reach < u.horizon)]
        for t0 in atoms:
            interior = interior[np.abs(interior - t0) > reach * (1.0 + 1e-9)]
        levels = [_difference(curve, interior, j, h / 2 ** i) for i in range(RICHARDSON_LEVELS)]
        estimates[j] = levels[-1]
        orders[j] = _observed_order(levels)
        inside = np.array([t for t in jump_times if reach < t < u.horizon - reach])
        if inside.size:
            atom_orders[j] = _observed_order(
                [_difference(curve, inside, j, h / 2 ** i) for i in range(RICHARDSON_LEVELS)])

    jumps = [JumpEstimate(float(t0), j, jump_estimate(curve, float(t0), j))
             for t0 in jump_times if 0.0 < t0 < u.horizon for j in range(order + 1)]

    return RegularityReport(order=order, times=grid, values=values,
                            derivative_estimates=estimates, convergence_orders=orders,
                            jumps=jumps, atom_orders=atom_orders, w_residual=residual,
                            in_w_space=in_w)


def leading_modes(system: SpectralSystem, count: Optional[int]) -> SpectralSystem:
    """Sub-system of the first count modes, extended to whole Jordan chains."""
    if count is None or count >= system.size:
        return system
    keep = set()
    for block in system.chains():
        if min(block) < count:
            keep.update(block)
    modes = tuple(system.modes[p] for p in sorted(keep))
    return SpectralSystem(modes, system.growth_bound, system.input_dim,
                          system.time_horizon_default, system.duality_convention, system.name)


def admissibility_constant(system: SpectralSystem, horizon: float,
                           trial_count: Optional[int] = None) -> float:
    """Truncated optimum of ||S*_T phi||_X / ||F_T* phi||_L2 over the adjoint space.

    Args:
        system: Spectral system
        horizon: Final time T
        trial_count: Use only the leading trial_count modes (whole chains kept)

    Raises:
        DegenerateOutput: If F_T* vanishes on the truncation
    """
    check_system(system)
    truncated = leading_modes(system, trial_count)
    flow = semigroup_matrix(truncated, horizon, Side.ADJOINT)
    return extremal_ratio(flow.conj().T @ flow, output_gram(truncated, horizon, 0),
                          'duality_engine')


def extension_bound(system: SpectralSystem, u: GeneralizedInput, order: int,
                    horizon: Optional[float] = None) -> Tuple[float, float, float]:
    """Check ||F_T u||_{X_-N} <= C ||u||_{U_-N} on the truncation for N = order >= 0.

    The dual norm of u is taken over the test subspace spanned by the kernels F_T* phi_k,
    and C is the norm of F_T* from X_N to H^N measured on the truncation.

    Returns:
        Tuple of (lhs, constant, dual_norm)
    """
    if order < 0:
        raise InvalidTowerIndex(f"extension bounds are checked for N >= 0, got {order}")
    horizon = float(u.horizon if horizon is None else horizon)
    zero = TowerVector({}, 0, Side.PRIMAL)
    state = final_state(system, zero, u, horizon)
    lhs = tower_norm(system, state.state.with_index(-order))
    pairings = state.state.to_array(system)
    gram = output_gram(system, horizon, order)
    dual = float(np.sqrt(whitened_quadratic_form(pairings, gram)))
    return lhs, extension_constant(system, horizon, order), dual
