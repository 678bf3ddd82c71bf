"""Time Signal Models

This module contains the representations of functions and distributional controls on a
time interval (0, T): sampled or closed-form signals with values in U, and generalized
inputs made of an L2 density, Dirac atoms and distributional-derivative parts.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

Evaluator = Callable[[np.ndarray], np.ndarray]

# Smoothness claimed by cosine series (every derivative exists)
SMOOTH_INDEX = 10**6


class DualSpaceTag(Enum):
    """Dual space a generalized input is paired in."""
    FULL_DUAL = "full_dual"
    ZERO_TRACE_DUAL = "zero_trace_dual"


@dataclass(eq=False)
class TimeSignal:
    """Function on (0, horizon) with values of shape value_shape.

    Sampled signals are read as the piecewise-linear interpolant of their samples on the
    uniform grid. Signals built from a closed form carry an evaluator and, optionally,
    evaluators of their derivatives; signals built from cosine coefficients are evaluated
    from the series. The leading value axis may also index a family of signals.
    """

    horizon: float
    values: np.ndarray
    cosine_coefficients: Optional[np.ndarray] = None
    smoothness_index: int = 0
    evaluator: Optional[Evaluator] = field(default=None, repr=False)
    derivatives: Tuple[Evaluator, ...] = field(default=(), repr=False)
    singular_points: Tuple[float, ...] = ()
    rate: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None]
        self.values = values
        if self.cosine_coefficients is not None:
            coefficients = np.asarray(self.cosine_coefficients, dtype=complex)
            if coefficients.ndim == 1:
                coefficients = coefficients[:, None]
            self.cosine_coefficients = coefficients
        self.derivatives = tuple(self.derivatives)
        self.singular_points = tuple(float(p) for p in self.singular_points)

    # Construction -------------------------------------------------------------------

    @classmethod
    def from_samples(cls, horizon: float, samples: Any, smoothness_index: int = 0) -> 'TimeSignal':
        """Signal given by samples on a uniform grid including both endpoints."""
        return cls(horizon=float(horizon), values=np.asarray(samples, dtype=complex),
                   smoothness_index=smoothness_index)

    @classmethod
    def from_function(cls, horizon: float, function: Evaluator, n_grid: int = 257,
                      derivatives: Sequence[Evaluator] = (), smoothness_index: Optional[int] = None,
                      singular_points: Sequence[float] = (), rate: float = 0.0) -> 'TimeSignal':
        """Signal given by a closed form, sampled on a uniform grid for reporting."""
        grid = np.linspace(0.0, horizon, n_grid)
        if smoothness_index is None:
            smoothness_index = len(derivatives)
        return cls(horizon=float(horizon), values=np.asarray(function(grid), dtype=complex),
                   smoothness_index=smoothness_index, evaluator=function,
                   derivatives=tuple(derivatives), singular_points=tuple(singular_points),
                   rate=rate)

    @classmethod
    def from_cosine(cls, horizon: float, coefficients: Any, n_grid: int = 257) -> 'TimeSignal':
        """Signal given by coefficients against cos(m pi t / T), m = 0..n_basis."""
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.ndim == 1:
            coefficients = coefficients[:, None]
        signal = cls(horizon=float(horizon), values=np.zeros((n_grid, coefficients.shape[1])),
                     cosine_coefficients=coefficients, smoothness_index=SMOOTH_INDEX,
                     rate=np.pi * (coefficients.shape[0] - 1) / horizon)
        signal.values = signal.evaluate(signal.grid)
        return signal

    # Introspection ------------------------------------------------------------------

    @property
    def n_grid(self) -> int:
        """Number of stored samples."""
        return int(self.values.shape[0])

    @property
    def grid(self) -> np.ndarray:
        """Uniform sample grid on [0, horizon]."""
        return np.linspace(0.0, self.horizon, self.n_grid)

    @property
    def value_shape(self) -> Tuple[int, ...]:
        """Shape of a single value."""
        return tuple(self.values.shape[1:])

    @property
    def input_dim(self) -> int:
        """Dimension of U."""
        return int(self.values.shape[-1])

    @property
    def is_sampled(self) -> bool:
        """Whether the signal is defined by its samples only."""
        return self.evaluator is None and self.cosine_coefficients is None

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """Kinks of the representation, the grid nodes for sampled signals."""
        if self.is_sampled:
            return tuple(self.grid[1:-1])
        return ()

    # Evaluation ---------------------------------------------------------------------

    def _cosine_matrix(self, t: np.ndarray, derivative: int = 0) -> np.ndarray:
        m = np.arange(self.cosine_coefficients.shape[0])
        omega = m * np.pi / self.horizon
        phase = np.outer(t, omega) + derivative * np.pi / 2.0
        return np.cos(phase) * omega[None, :] ** derivative

    def evaluate(self, t: Any) -> np.ndarray:
        """Values at times t, shape (len(t),) + value_shape."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.evaluator is not None:
            values = np.asarray(self.evaluator(t), dtype=complex)
            return values.reshape((t.size,) + self.value_shape)
        if self.cosine_coefficients is not None:
            return self._cosine_matrix(t) @ self.cosine_coefficients
        flat = self.values.reshape(self.n_grid, -1)
        grid = self.grid
        out = np.empty((t.size, flat.shape[1]), dtype=complex)
        for column in range(flat.shape[1]):
            out[:, column] = (np.interp(t, grid, flat[:, column].real)
                              + 1j * np.interp(t, grid, flat[:, column].imag))
        return out.reshape((t.size,) + self.value_shape)

    def has_derivative(self, order: int) -> bool:
        """Whether the representation can evaluate the given derivative."""
        if order == 0 or self.cosine_coefficients is not None:
            return True
        if self.evaluator is not None:
            return len(self.derivatives) >= order
        return order == 1

    def derivative(self, t: Any, order: int = 1) -> np.ndarray:
        """Derivative of the given order at times t.

        Raises:
            ValueError: If the representation has no derivative of that order
        """
        if order == 0:
            return self.evaluate(t)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.cosine_coefficients is not None:
            return self._cosine_matrix(t, order) @ self.cosine_coefficients
        if self.evaluator is not None:
            if len(self.derivatives) < order:
                raise ValueError(f"signal carries no derivative of order {order}")
            values = np.asarray(self.derivatives[order - 1](t), dtype=complex)
            return values.reshape((t.size,) + self.value_shape)
        if order > 1:
            raise ValueError("sampled signals are piecewise linear; only first derivatives exist")
        grid = self.grid
        steps = np.diff(grid).reshape((-1,) + (1,) * (self.values.ndim - 1))
        slopes = np.diff(self.values, axis=0) / steps
        cell = np.clip(np.searchsorted(grid, t, side='right') - 1, 0, self.n_grid - 2)
        return slopes[cell]

    def endpoint_values(self) -> np.ndarray:
        """Values at 0 and at the horizon."""
        return self.evaluate(np.array([0.0, self.horizon]))

    # Serialization ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        """Sampled JSON form (closed-form evaluators are not serialized)."""
        return {
            'horizon': float(self.horizon),
            'smoothness_index': int(self.smoothness_index),
            're': self.values.real.tolist(),
            'im': self.values.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TimeSignal':
        """Create a sampled signal from its JSON form."""
        real = np.asarray(data['re'], dtype=float)
        imag = np.asarray(data.get('im', np.zeros_like(real)), dtype=float)
        return cls.from_samples(data['horizon'], real + 1j * imag,
                                int(data.get('smoothness_index', 0)))


@dataclass(eq=False)
class Atom:
    """Dirac mass delta_{t0} (x) u0."""
    t0: float
    u0: np.ndarray

    def __post_init__(self) -> None:
        self.t0 = float(self.t0)
        self.u0 = np.atleast_1d(np.asarray(self.u0, dtype=complex))


@dataclass(eq=False)
class DerivativePart:
    """Distributional derivative -g' (x) u0 of a scalar signal g."""
    g: TimeSignal
    u0: np.ndarray

    def __post_init__(self) -> None:
        self.u0 = np.atleast_1d(np.asarray(self.u0, dtype=complex))


@dataclass(eq=False)
class GeneralizedInput:
    """Control law in (H^1(0,T;U))*: density + atoms + derivative parts."""

    horizon: float
    input_dim: int = 1
    density: Optional[TimeSignal] = None
    atoms: List[Atom] = field(default_factory=list)
    derivative_parts: List[DerivativePart] = field(default_factory=list)
    dual_index: Optional[int] = None

    def __post_init__(self) -> None:
        if self.dual_index is None:
            self.dual_index = self.required_index

    @property
    def required_index(self) -> int:
        """Deepest tower level the representation needs (0 or -1)."""
        return -1 if (self.atoms or self.derivative_parts) else 0

    @property
    def is_regular(self) -> bool:
        """Whether the input is an L2 density only."""
        return not self.atoms and not self.derivative_parts

    @classmethod
    def from_density(cls, density: TimeSignal,
                     dual_index: Optional[int] = None) -> 'GeneralizedInput':
        """Input made of an L2 density."""
        return cls(horizon=density.horizon, input_dim=density.input_dim, density=density,
                   dual_index=dual_index)

    @classmethod
    def dirac(cls, horizon: float, t0: float, u0: Any) -> 'GeneralizedInput':
        """Single atom delta_{t0} (x) u0."""
        atom = Atom(t0, u0)
        return cls(horizon=horizon, input_dim=atom.u0.size, atoms=[atom])

    @classmethod
    def derivative_of(cls, g: TimeSignal, u0: Any) -> 'GeneralizedInput':
        """Single derivative part -g' (x) u0."""
        part = DerivativePart(g, u0)
        return cls(horizon=g.horizon, input_dim=part.u0.size, derivative_parts=[part])

    @classmethod
    def zero(cls, horizon: float, input_dim: int = 1) -> 'GeneralizedInput':
        """The zero input."""
        return cls(horizon=horizon, input_dim=input_dim)

    def validate(self) -> Tuple[bool, str]:
        """Validate the representation.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if self.horizon <= 0:
            return False, "horizon must be positive"
        if self.dual_index != self.required_index:
            return False, (f"dual_index {self.dual_index} does not match the representation "
                           f"(expected {self.required_index})")
        if self.density is not None:
            if abs(self.density.horizon - self.horizon) > 1e-12:
                return False, "density horizon differs from input horizon"
            if self.density.input_dim != self.input_dim:
                return False, "density dimension differs from input_dim"
        for atom in self.atoms:
            if not 0.0 <= atom.t0 <= self.horizon:
                return False, f"atom at {atom.t0} lies outside [0, {self.horizon}]"
            if atom.u0.size != self.input_dim:
                return False, "atom direction has the wrong dimension"
        for part in self.derivative_parts:
            if part.u0.size != self.input_dim:
                return False, "derivative part direction has the wrong dimension"
            if part.g.input_dim != 1:
                return False, "derivative parts need a scalar signal g"
        return True, ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert input to its JSON form."""
        def vector(u: np.ndarray) -> Dict[str, List[float]]:
            return {'re': u.real.tolist(), 'im': u.imag.tolist()}

        return {
            'horizon': float(self.horizon),
            'input_dim': int(self.input_dim),
            'density': self.density.to_dict() if self.density is not None else None,
            'atoms': [{'t0': a.t0, 'u0': vector(a.u0)} for a in self.atoms],
            'derivative_parts': [{'g': p.g.to_dict(), 'u0': vector(p.u0)}
                                 for p in self.derivative_parts],
            'dual_index': int(self.dual_index),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GeneralizedInput':
        """Create input from its JSON form."""
        def vector(item: Dict[str, Any]) -> np.ndarray:
            real = np.asarray(item['re'], dtype=float)
            return real + 1j * np.asarray(item.get('im', np.zeros_like(real)), dtype=float)

        density = data.get('density')
        return cls(
            horizon=float(data['horizon']),
            input_dim=int(data.get('input_dim', 1)),
            density=TimeSignal.from_dict(density) if density else None,
            atoms=[Atom(a['t0'], vector(a['u0'])) for a in data.get('atoms', [])],
            derivative_parts=[DerivativePart(TimeSignal.from_dict(p['g']), vector(p['u0']))
                              for p in data.get('derivative_parts', [])],
            dual_index=data.get('dual_index'),
        )
