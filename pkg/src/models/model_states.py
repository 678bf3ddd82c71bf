"""Concrete Model States

This module contains the state records of the wave and heat-wave models: nodal wave data
on (0, pi) and sampled eigenvectors of the coupled heat-wave adjoint generator.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(eq=False)
class WaveState:
    """Displacement and velocity samples on the uniform grid of [0, pi]."""

    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self) -> None:
        self.phi = np.asarray(self.phi, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)

    @classmethod
    def from_functions(cls, phi, psi, n_grid: int) -> 'WaveState':
        """Sample closed-form displacement and velocity on n_grid nodes."""
        x = np.linspace(0.0, np.pi, n_grid)
        return cls(np.broadcast_to(phi(x), x.shape).copy(), np.broadcast_to(psi(x), x.shape).copy())

    @property
    def n_grid(self) -> int:
        return int(self.phi.size)

    @property
    def h(self) -> float:
        """Grid spacing."""
        return float(np.pi / (self.n_grid - 1))

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.n_grid)

    def validate(self, tolerance: float = 1e-8) -> Tuple[bool, str]:
        """Validate the boundary compatibility of the data.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if self.phi.shape != self.psi.shape or self.phi.ndim != 1:
            return False, "phi and psi must be 1-D arrays of equal length"
        if self.n_grid < 3:
            return False, "at least three grid nodes are required"
        if abs(self.phi[-1]) > tolerance:
            return False, f"phi(pi) = {self.phi[-1]:.3e} violates the Dirichlet condition"
        return True, ""


@dataclass(eq=False)
class HeatWaveMode:
    """Eigenvector (f, g, h) of the coupled heat-wave adjoint generator."""

    eigenvalue: complex
    f: np.ndarray
    g: np.ndarray
    h_comp: np.ndarray
    control_trace: complex
    residual: float
    x_f: np.ndarray
    x_g: np.ndarray
    norm_scale: float = 1.0


@dataclass(eq=False)
class WaveSolution:
    """Final wave state with the boundary velocity record t -> w_t(t, 0)."""

    state: WaveState
    times: np.ndarray
    trace: np.ndarray
    aligned: bool = True
