"""Wave Characteristics Service

This module transports the Riemann invariants xi = w_t - w_x and eta = w_t + w_x of the
uncontrolled wave equation on (0, pi) with w_x(t, 0) = 0 and w(t, pi) = 0.

Both invariants are read off one profile F on (-pi, pi]: xi(0, x) = F(x) and
eta(0, x) = F(-x). The reflection at 0 is built into this unfolding, the reflection at pi
makes F antiperiodic with period 2 pi, and the solution is xi(t, x) = F(x - t),
eta(t, x) = F(-x - t). On the nodal grid x_j = j h, shifts by whole steps are exact.
"""

from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from logger import app_logger
from models.model_states import WaveSolution, WaveState
from models.results import WConditionResult
from models.spectral_system import Side, SpectralSystem, TowerVector
from .model_zoo import make_neumann_wave, wave_frequency
from .spectral_core import semigroup_apply

ALIGNMENT_TOLERANCE = 1e-9


def trapezoid_derivative(phi: np.ndarray, h: float) -> np.ndarray:
    """Nodal derivative d with d_0 = 0 whose trapezoid integral reproduces phi exactly.

    Solves (d_j + d_{j+1}) h / 2 = phi_{j+1} - phi_j by alternating partial sums.
    """
    slopes = 2.0 * np.diff(phi) / h
    signs = (-1.0) ** np.arange(slopes.size)
    derivative = np.zeros(phi.size)
    derivative[1:] = signs * np.cumsum(signs * slopes)
    return derivative


def integrate_from_pi(derivative: np.ndarray, h: float) -> np.ndarray:
    """Displacement with phi(pi) = 0 from nodal derivatives by the trapezoid rule."""
    running = cumulative_trapezoid(derivative, dx=h, initial=0.0)
    return running - running[-1]


def unfold_profile(state: WaveState) -> np.ndarray:
    """Profile F on the 2(n-1) nodes x_p = (p - (n-2)) h of (-pi, pi]."""
    n = state.n_grid
    derivative = trapezoid_derivative(state.phi, state.h)
    profile = np.empty(2 * (n - 1))
    inner = np.arange(1, n - 1)
    profile[n - 2 - inner] = state.psi[inner] + derivative[inner]
    profile[n - 2 + np.arange(n)] = state.psi - derivative
    return profile


def _profile_at_index(profile: np.ndarray, index: np.ndarray) -> np.ndarray:
    period = profile.size
    index = np.asarray(index, dtype=int)
    return profile[np.mod(index, period)] * (-1.0) ** np.floor_divide(index, period)


def profile_at(profile: np.ndarray, position: np.ndarray) -> np.ndarray:
    """F at fractional node positions, linear between nodes and exact on them."""
    position = np.atleast_1d(np.asarray(position, dtype=float))
    nearest = np.round(position)
    exact = np.abs(position - nearest) <= ALIGNMENT_TOLERANCE
    lower = np.floor(position)
    weight = position - lower
    blended = ((1.0 - weight) * _profile_at_index(profile, lower)
               + weight * _profile_at_index(profile, lower + 1))
    return np.where(exact, _profile_at_index(profile, nearest), blended)


def _is_aligned(steps: float) -> bool:
    return abs(steps - round(steps)) <= ALIGNMENT_TOLERANCE * max(1.0, abs(steps))


def wave_characteristics_solve(state0: WaveState, horizon: float,
                               grid: Optional[Sequence[float]] = None) -> WaveSolution:
    """Exact transport of the Riemann invariants up to time T (negative T runs backwards).

    Args:
        state0: Initial displacement and velocity
        horizon: Final time T
        grid: Times of the boundary record, defaults to the multiples of h up to T

    Returns:
        WaveSolution with the final state and t -> w_t(t, 0)
    """
    ok, message = state0.validate()
    if not ok:
        raise ValueError(f"invalid wave state: {message}")
    n, h = state0.n_grid, state0.h
    profile = unfold_profile(state0)

    steps = horizon / h
    aligned = _is_aligned(steps)
    if not aligned:
        app_logger.log_numerics_event(
            'wave_characteristics', 'horizon is not a multiple of the grid step',
            f"T/h = {steps:.6f}; interpolating the shifted profile")

    nodes = np.arange(n)
    xi = profile_at(profile, n - 2 + nodes - steps)
    eta = profile_at(profile, n - 2 - nodes - steps)
    velocity = 0.5 * (xi + eta)
    derivative = 0.5 * (eta - xi)
    final = WaveState(integrate_from_pi(derivative, h), velocity)

    if grid is None:
        count = int(np.floor(abs(steps) + ALIGNMENT_TOLERANCE))
        times = np.sign(horizon) * h * np.arange(count + 1)
    else:
        times = np.asarray(grid, dtype=float)
    trace = profile_at(profile, n - 2 - times / h)
    return WaveSolution(final, times, trace, aligned)


def wave_energy(state: WaveState) -> float:
    """Discrete energy (1/2) int (phi_x^2 + psi^2) = (1/4) int F^2 over the unfolded period."""
    return float(0.25 * state.h * np.sum(unfold_profile(state) ** 2))


def _interpolate(values: np.ndarray, h: float, point: float) -> float:
    return float(np.interp(point, h * np.arange(values.size), values))


def wave_W_condition(state: WaveState, horizon: float) -> WConditionResult:
    """Residuals of the W-membership conditions of (phi, psi) at time T.

    The ray through (T, 0) is traced backwards to t = 0 with the reflections at 0 and pi;
    at its landing point alpha it picks the eta form -psi(alpha) + phi_x(alpha) or the
    xi form -psi(alpha) - phi_x(alpha). Each reflection at pi flips the sign.
    """
    ok, message = state.validate()
    if not ok:
        raise ValueError(f"invalid wave state: {message}")
    h = state.h
    derivative = trapezoid_derivative(state.phi, h)

    start = -float(horizon)
    windings = int(np.floor((np.pi - start) / (2.0 * np.pi)))
    landing = start + 2.0 * np.pi * windings
    sign = (-1.0) ** windings
    if landing <= 0.0:
        branch, alpha = 'eta', -landing
        value = -_interpolate(state.psi, h, alpha) + _interpolate(derivative, h, alpha)
    else:
        branch, alpha = 'xi', landing
        value = -_interpolate(state.psi, h, alpha) - _interpolate(derivative, h, alpha)

    return WConditionResult(psi0_residual=abs(float(state.psi[0])),
                            traced_residual=abs(sign * value), landing_point=alpha,
                            branch=branch, reflections=abs(windings), sign=sign)


def wave_mode_profiles(k: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Displacement, its derivative and velocity of the orthonormal eigenvector of mode k."""
    omega = wave_frequency(k)
    mu = 1j * (k + 0.5)
    scale = 1.0 / (omega * np.sqrt(np.pi))
    phi = scale * np.cos(omega * x)
    return phi, -scale * omega * np.sin(omega * x), -mu * phi


def wave_project(state: WaveState, n_max: int) -> TowerVector:
    """Primal coefficients (state, phi_k) in H^1_(pi) x L2 by the trapezoid rule."""
    x = state.x
    derivative = trapezoid_derivative(state.phi, state.h)
    coefficients = {}
    for k in range(-n_max - 1, n_max + 1):
        _, mode_derivative, mode_velocity = wave_mode_profiles(k, x)
        integrand = derivative * np.conj(mode_derivative) + state.psi * np.conj(mode_velocity)
        coefficients[k] = complex(trapezoid(integrand, dx=state.h))
    return TowerVector(coefficients, 0, Side.PRIMAL)


def wave_synthesize(coefficients: TowerVector, n_grid: int) -> WaveState:
    """Real wave state sum_k a_k phi_k sampled on n_grid nodes."""
    x = np.linspace(0.0, np.pi, n_grid)
    phi = np.zeros(n_grid, dtype=complex)
    psi = np.zeros(n_grid, dtype=complex)
    for k, value in coefficients.coefficients.items():
        mode_phi, _, mode_psi = wave_mode_profiles(k, x)
        phi += value * mode_phi
        psi += value * mode_psi
    return WaveState(phi.real, psi.real)


def wave_spectral_solve(state0: WaveState, horizon: float, n_max: int,
                        system: Optional[SpectralSystem] = None) -> WaveState:
    """Spectral oracle: project, flow with the primal semigroup, resynthesize."""
    system = system or make_neumann_wave(n_max)
    coefficients = wave_project(state0, n_max)
    if horizon >= 0:
        evolved = semigroup_apply(system, horizon, coefficients)
    else:
        # skew-adjoint generator: the backward flow is the adjoint flow
        evolved = TowerVector(semigroup_apply(system, -horizon,
                                              TowerVector(coefficients.coefficients, 0,
                                                          Side.ADJOINT)).coefficients,
                              0, Side.PRIMAL)
    return wave_synthesize(evolved, state0.n_grid)
