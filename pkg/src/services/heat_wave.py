"""Heat-Wave Eigen-Solver Service

This module computes the hyperbolic eigen-branch of the adjoint generator of the coupled
heat-wave system: a heat component f on (0, 1) and a wave component (g, h) on (-1, 0),
with A*(f, g, h) = (f'', h, g'') and B*(f, g, h) = f'(1).

Eigenvectors solve f'' = mu f, g'' = mu^2 g, h = mu g with f(1) = 0, g(-1) = 0,
f(0) = g(0) and f'(0) = g'(0). With s = sqrt(mu), f = a sinh(s (1 - x)) and
g = sinh(mu (x + 1)); matching leaves the characteristic function
D(mu) = mu cosh(mu) tanh(s) / s + sinh(mu), which is even in s and therefore entire away
from the poles of tanh.
"""

from typing import Iterable, List, Optional, Tuple

import numpy as np

from errors import DegenerateOutput, RootNotConverged
from logger import app_logger
from models.model_states import HeatWaveMode
from models.spectral_system import Branch, Eigenmode, SpectralSystem
from quadrature import gauss_legendre_rule, integrate
from .numerics_config import numerics_config

EIGEN_TABLE_COLUMNS = ('k', 're_seed', 'im_seed', 're_root', 'im_root', 'residual',
                       'control_trace_abs')
PLACEHOLDER_OFFSET = 1000
SAMPLE_POINTS = 201


def _tanh_ratio(s: complex) -> complex:
    """tanh(s) / s with its removable singularity at s = 0."""
    if abs(s) < 1e-8:
        return 1.0 - s * s / 3.0
    return complex(np.tanh(s) / s)


def heatwave_determinant(mu: complex) -> complex:
    """Characteristic function D(mu) of the hyperbolic matching problem."""
    mu = complex(mu)
    s = np.sqrt(mu)
    return complex(mu * np.cosh(mu) * _tanh_ratio(s) + np.sinh(mu))


def heatwave_seed(k: int) -> complex:
    """Asymptotic location of the k-th hyperbolic eigenvalue."""
    scale = 1.0 / np.sqrt(abs(1 + 2 * k) * np.pi)
    return complex(-scale, (0.5 + k) * np.pi + np.sign(k) * scale)


def secant_root(function, seed: complex, max_iterations: Optional[int] = None,
                tolerance: Optional[float] = None,
                max_step: Optional[float] = None) -> Tuple[complex, float]:
    """Complex secant iteration with step damping.

    Returns:
        Tuple of (root, residual)

    Raises:
        RootNotConverged: If the residual tolerance is not reached
    """
    max_iterations = int(max_iterations or numerics_config.get('SECANT_MAX_ITERATIONS'))
    tolerance = float(tolerance or numerics_config.get('SECANT_TOLERANCE'))
    max_step = float(max_step or numerics_config.get('SECANT_MAX_STEP'))

    previous, current = complex(seed), complex(seed) + 1e-4 * (1.0 + 1.0j)
    f_previous, f_current = function(previous), function(current)
    for _ in range(max_iterations):
        residual = abs(f_current)
        if residual <= tolerance:
            return current, residual
        slope = f_current - f_previous
        if slope == 0:
            break
        step = -f_current * (current - previous) / slope
        if abs(step) > max_step:
            step *= max_step / abs(step)
        previous, f_previous = current, f_current
        current = current + step
        f_current = function(current)
    residual = abs(f_current)
    if residual <= tolerance:
        return current, residual
    raise RootNotConverged(complex(seed), current, residual)


def _check_asymptotic(k: int) -> None:
    minimum = int(numerics_config.get_default('ASYMPTOTIC_MIN_K'))
    if abs(k) < minimum and abs(k + 1) < minimum:
        raise ValueError(f"mode {k} lies outside the asymptotic seeding regime |k| >= {minimum}")


def heatwave_root(k: int) -> Tuple[complex, complex, float]:
    """Seed, converged eigenvalue and determinant residual of hyperbolic mode k."""
    _check_asymptotic(k)
    seed = heatwave_seed(k)
    root, residual = secant_root(heatwave_determinant, seed)
    return seed, root, residual


def heatwave_eigenvalues(k_range: Iterable[int], horizon: Optional[float] = None) -> List[complex]:
    """Hyperbolic eigenvalues for each k (horizon is accepted for call symmetry only).

    Raises:
        RootNotConverged: With the seed and last iterate of the first failing mode
    """
    return [heatwave_root(k)[1] for k in k_range]


def _components(mu: complex, x_f: np.ndarray, x_g: np.ndarray):
    s = np.sqrt(complex(mu))
    a = np.sinh(mu) / np.sinh(s)
    f = a * np.sinh(s * (1.0 - x_f))
    f_x = -a * s * np.cosh(s * (1.0 - x_f))
    g = np.sinh(mu * (x_g + 1.0))
    g_x = mu * np.cosh(mu * (x_g + 1.0))
    return s, a, f, f_x, g, g_x


def _state_norm(mu: complex) -> float:
    """Norm in H^1(0,1) x H^1(-1,0) x L2(-1,0) by composite Gauss-Legendre quadrature."""
    panels = int(numerics_config.get('HEATWAVE_QUADRATURE_PANELS'))
    options = numerics_config.quadrature_options()
    x_f, w_f = gauss_legendre_rule(0.0, 1.0, panels=panels, rate=abs(np.sqrt(complex(mu))),
                                   options=options)
    x_g, w_g = gauss_legendre_rule(-1.0, 0.0, panels=panels, rate=abs(mu),
                                   options=options)
    _, _, f, f_x, g, g_x = _components(mu, x_f, x_g)
    h = mu * g
    energy = (integrate(np.abs(f) ** 2 + np.abs(f_x) ** 2, w_f)
              + integrate(np.abs(g) ** 2 + np.abs(g_x) ** 2 + np.abs(h) ** 2, w_g))
    return float(np.sqrt(np.real(energy)))


def heatwave_mode(mu: complex, n_points: int = SAMPLE_POINTS) -> HeatWaveMode:
    """Normalized eigenvector (f, g, h) of A* for a converged eigenvalue mu.

    Raises:
        DegenerateOutput: If the eigenvector is numerically null
    """
    mu = complex(mu)
    norm = _state_norm(mu)
    if not np.isfinite(norm) or norm <= 1e-300:
        raise DegenerateOutput(f"eigenvector of mu = {mu:.6g} cannot be normalized")
    scale = 1.0 / norm

    x_f = np.linspace(0.0, 1.0, n_points)
    x_g = np.linspace(-1.0, 0.0, n_points)
    s, a, f, f_x, g, g_x = _components(mu, x_f, x_g)
    f_xx = a * s * s * np.sinh(s * (1.0 - x_f))
    g_xx = mu * mu * np.sinh(mu * (x_g + 1.0))

    size = max(float(np.max(np.abs(f))), float(np.max(np.abs(g))), 1.0)
    residuals = [
        float(np.max(np.abs(f_xx - mu * f))) / (abs(mu) * size),
        float(np.max(np.abs(g_xx - mu * mu * g))) / (abs(mu) ** 2 * size),
        abs(f[-1]) / size,
        abs(g[0]) / size,
        abs(f[0] - g[-1]) / size,
        abs(f_x[0] - g_x[-1]) / (abs(mu) * size),
    ]
    return HeatWaveMode(eigenvalue=mu, f=scale * f, g=scale * g, h_comp=scale * mu * g,
                        control_trace=complex(scale * f_x[-1]), residual=max(residuals),
                        x_f=x_f, x_g=x_g, norm_scale=scale)


def eigenvalue_table(k_range: Iterable[int]) -> List[Tuple]:
    """Rows k, seed, root, residual and |B* phi_k| for the eigenvalue CSV."""
    rows = []
    for k in k_range:
        seed, root, residual = heatwave_root(k)
        trace = heatwave_mode(root).control_trace
        rows.append((k, seed.real, seed.imag, root.real, root.imag, residual, abs(trace)))
    return rows


def make_heat_wave(k_range: Iterable[int], parabolic_placeholders: int = 0) -> SpectralSystem:
    """Spectral system of the hyperbolic branch, optionally with parabolic placeholders.

    Modes whose root search fails are skipped with a warning. Placeholder modes follow the
    decoupled heat asymptotics mu = -(l pi)^2 with trace -sqrt(2) l pi and carry the
    labels 1000 + l.
    """
    modes = []
    for k in k_range:
        try:
            _, root, _ = heatwave_root(k)
        except RootNotConverged as e:
            app_logger.log_numerics_event('heat_wave', f"skipping hyperbolic mode {k}", str(e))
            continue
        modes.append(Eigenmode(k, root, [heatwave_mode(root).control_trace],
                               branch=Branch.HYPERBOLIC))
    for level in range(1, parabolic_placeholders + 1):
        modes.append(Eigenmode(PLACEHOLDER_OFFSET + level, -(level * np.pi) ** 2,
                               [-np.sqrt(2.0) * level * np.pi], branch=Branch.PARABOLIC))
    growth = max((mode.eigenvalue.real for mode in modes), default=0.0)
    return SpectralSystem(tuple(modes), growth_bound=max(growth, 0.0), input_dim=1,
                          name='heat_wave')
