"""Model Zoo Service

This module builds the concrete truncated systems: the scalar integrator, the Neumann heat
equation controlled through -delta_0 with its obstruction series psi, and the Neumann
wave equation controlled through the velocity trace at 0.
"""

from typing import Optional

import numpy as np

from models.results import HeatPsiResult
from models.spectral_system import Branch, Eigenmode, Side, SpectralSystem, TowerVector
from quadrature import gauss_legendre_rule, integrate

from .numerics_config import numerics_config
from .spectral_core import tower_norm

HEAT_CONSTANT_TRACE = -1.0 / np.sqrt(np.pi)
HEAT_COSINE_TRACE = -np.sqrt(2.0 / np.pi)


def make_toy() -> SpectralSystem:
    """Scalar integrator x' = f: one mode mu = 0 with trace 1."""
    return SpectralSystem((Eigenmode(0, 0.0, [1.0]),), growth_bound=0.0, input_dim=1,
                          name='toy')


def make_neumann_heat(n_max: int) -> SpectralSystem:
    """Neumann heat equation on (0, pi) with B* = -delta_0, modes n = 0..n_max.

    Eigenfunctions are c_0 = 1/sqrt(pi) and c_n = sqrt(2/pi) cos(n x), with mu_n = -n^2
    and traces b_n = -c_n(0).
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    modes = [Eigenmode(0, 0.0, [HEAT_CONSTANT_TRACE])]
    modes += [Eigenmode(n, -float(n * n), [HEAT_COSINE_TRACE]) for n in range(1, n_max + 1)]
    return SpectralSystem(tuple(modes), growth_bound=0.0, input_dim=1, name='neumann_heat')


def heat_eigenfunction(n: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Neumann eigenfunction c_n on (0, pi)."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.full(x.shape, 1.0 / np.sqrt(np.pi))
    return np.sqrt(2.0 / np.pi) * np.cos(n * x)


def heat_psi_coefficients(horizon: float, n_max: int) -> np.ndarray:
    """Coefficients -e^{-n^2 T} c_n(0) of psi against c_0..c_n_max."""
    n = np.arange(n_max + 1)
    values_at_zero = np.where(n == 0, 1.0 / np.sqrt(np.pi), np.sqrt(2.0 / np.pi))
    return -np.exp(-(n ** 2) * horizon) * values_at_zero


def heat_psi_tail_bound(horizon: float, n_max: int) -> float:
    """Bound sum_{n > n_max} (2/pi) e^{-n^2 T} on the sup-norm of the truncation error."""
    span = int(np.ceil(np.sqrt(750.0 / horizon))) + 1
    n = np.arange(n_max + 1, n_max + 1 + span)
    return float(np.sum(2.0 / np.pi * np.exp(-(n.astype(float) ** 2) * horizon)))


def heat_psi_vector(horizon: float, n_max: int) -> TowerVector:
    """psi as a state of the heat system (coefficients against the orthonormal basis)."""
    coefficients = heat_psi_coefficients(horizon, n_max)
    return TowerVector(dict(enumerate(coefficients)), 0, Side.PRIMAL)


def _psi_values(horizon: float, n_max: int, x: np.ndarray) -> np.ndarray:
    coefficients = heat_psi_coefficients(horizon, n_max)
    basis = np.stack([heat_eigenfunction(n, x) for n in range(n_max + 1)], axis=1)
    return basis @ coefficients


def heat_psi_norm(horizon: float, n_max: int, method: str = 'series') -> float:
    """L2(0, pi) norm of the truncated psi.

    Args:
        horizon: Final time T
        n_max: Truncation
        method: 'series' (orthonormal coefficients) or 'quadrature' (samples of psi)
    """
    if method == 'series':
        return float(np.linalg.norm(heat_psi_coefficients(horizon, n_max)))
    if method == 'quadrature':
        nodes, weights = gauss_legendre_rule(0.0, np.pi, rate=2.0 * n_max,
                                             options=numerics_config.quadrature_options())
        return float(np.sqrt(np.real(integrate(_psi_values(horizon, n_max, nodes) ** 2, weights))))
    raise ValueError(f"unknown method '{method}'")


def heat_psi(horizon: float, n_max: int, x_grid: Optional[np.ndarray] = None) -> HeatPsiResult:
    """Samples of psi(x) = -sum_n e^{-n^2 T} c_n(0) c_n(x) with the truncation tail bound."""
    if horizon <= 0:
        raise ValueError(f"T must be positive, got {horizon}")
    x = np.linspace(0.0, np.pi, 257) if x_grid is None else np.asarray(x_grid, dtype=float)
    return HeatPsiResult(x=x, values=_psi_values(horizon, n_max, x),
                         tail_bound=heat_psi_tail_bound(horizon, n_max),
                         norm=heat_psi_norm(horizon, n_max))


def obstruction_check(horizon: float, n_max: int) -> float:
    """||psi||_X on the heat truncation; a positive value certifies that no H^-1 extension
    exists, since delta_0 F_T* phi = (phi, psi)_X for every phi."""
    return tower_norm(make_neumann_heat(n_max), heat_psi_vector(horizon, n_max))


def wave_frequency(k: int) -> float:
    """|k + 1/2|, the frequency of wave mode k."""
    return abs(k + 0.5)


def make_neumann_wave(n_max: int) -> SpectralSystem:
    """Wave equation w_tt = w_xx on (0, pi), w_x(t, 0) = u, w(t, pi) = 0.

    Modes k = -n_max-1..n_max with mu_k = i (k + 1/2). The orthonormal eigenvectors of A*
    in H^1_(pi) x L2 are (cos(w x), -mu cos(w x)) / (w sqrt(pi)), w = |k + 1/2|, and
    B*(phi, psi) = -psi(0) gives b_k = i sign(k + 1/2) / sqrt(pi).
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    modes = []
    for k in range(-n_max - 1, n_max + 1):
        sign = 1.0 if k >= 0 else -1.0
        modes.append(Eigenmode(k, 1j * (k + 0.5), [1j * sign / np.sqrt(np.pi)],
                               branch=Branch.HYPERBOLIC))
    return SpectralSystem(tuple(modes), growth_bound=0.0, input_dim=1, name='neumann_wave')
