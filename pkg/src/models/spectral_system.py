"""Spectral System Model

This module contains the data models for the diagonal/Jordan representation of a control
system: eigenmodes of the adjoint generator with their control traces, the system that
owns them, and coefficient vectors on the Sobolev tower.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np


class Branch(Enum):
    """Spectral branch a mode belongs to."""
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    JORDAN = "jordan"


class Side(Enum):
    """Which biorthogonal family a coefficient vector is expanded in."""
    PRIMAL = "primal"
    ADJOINT = "adjoint"


@dataclass(frozen=True)
class DualityConvention:
    """Conjugation placement shared by every pairing in the toolkit.

    Pairings are linear in the first slot and anti-linear in the second. The primal mode
    z_k satisfies A z_k = conj(mu_k) z_k, so primal coefficients evolve with the conjugate
    eigenvalue.
    """

    linear_slot: str = "first"
    antilinear_slot: str = "second"
    primal_eigenvalue: str = "conjugate"

    def state_pairing(self, z: np.ndarray, phi: np.ndarray) -> complex:
        """Pairing of primal coefficients z against adjoint coefficients phi."""
        return complex(np.vdot(phi, z))

    def input_inner(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Inner product on U along the last axis, anti-linear in v."""
        return np.sum(u * np.conj(v), axis=-1)


DUALITY = DualityConvention()


def _complex_vector(values: Any) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=complex))


@dataclass(frozen=True, eq=False)
class Eigenmode:
    """An eigenvalue of A* with its control trace b_k = B* phi_k."""

    index: int
    eigenvalue: complex
    control_trace: np.ndarray
    branch: Branch = Branch.PARABOLIC
    chain: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, 'eigenvalue', complex(self.eigenvalue))
        object.__setattr__(self, 'control_trace', _complex_vector(self.control_trace))
        object.__setattr__(self, 'chain', tuple(int(i) for i in self.chain))

    @property
    def chain_position(self) -> int:
        """Position inside the Jordan chain, 0 for the eigenvector itself."""
        return self.chain.index(self.index) if self.chain else 0

    def validate(self) -> Tuple[bool, str]:
        """Validate the mode.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if not np.isfinite(self.eigenvalue):
            return False, f"mode {self.index}: eigenvalue is not finite"
        if not np.all(np.isfinite(self.control_trace)):
            return False, f"mode {self.index}: control trace is not finite"
        if self.branch is Branch.JORDAN:
            if len(self.chain) < 1 or self.index not in self.chain:
                return False, f"mode {self.index}: Jordan mode must belong to its chain"
        elif self.chain and len(self.chain) > 1:
            return False, f"mode {self.index}: only Jordan modes carry chains"
        return True, ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert mode to its JSON form."""
        return {
            'index': self.index,
            're': float(self.eigenvalue.real),
            'im': float(self.eigenvalue.imag),
            'b_re': [float(x) for x in self.control_trace.real],
            'b_im': [float(x) for x in self.control_trace.imag],
            'branch': self.branch.value,
            'chain': list(self.chain),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Eigenmode':
        """Create mode from its JSON form."""
        b_re = np.asarray(data.get('b_re', []), dtype=float)
        b_im = np.asarray(data.get('b_im', [0.0] * len(b_re)), dtype=float)
        return cls(
            index=int(data['index']),
            eigenvalue=complex(data.get('re', 0.0), data.get('im', 0.0)),
            control_trace=b_re + 1j * b_im,
            branch=Branch(data.get('branch', Branch.PARABOLIC.value)),
            chain=tuple(data.get('chain', [])),
        )


@dataclass(frozen=True, eq=False)
class SpectralSystem:
    """Truncated spectral representation of a control system."""

    modes: Tuple[Eigenmode, ...]
    growth_bound: float
    input_dim: int
    time_horizon_default: float = 1.0
    duality_convention: DualityConvention = DUALITY
    name: str = ""
    _positions: Dict[int, int] = field(default_factory=dict, init=False, repr=False,
                                       compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'modes', tuple(self.modes))
        object.__setattr__(self, '_positions',
                           {mode.index: pos for pos, mode in enumerate(self.modes)})

    @property
    def size(self) -> int:
        """Number of modes in the truncation."""
        return len(self.modes)

    @property
    def indices(self) -> List[int]:
        """Mode labels in storage order."""
        return [mode.index for mode in self.modes]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of A* in storage order."""
        return np.array([mode.eigenvalue for mode in self.modes], dtype=complex)

    @property
    def traces(self) -> np.ndarray:
        """Control traces as an (n_modes, input_dim) array."""
        if not self.modes:
            return np.zeros((0, self.input_dim), dtype=complex)
        return np.stack([mode.control_trace for mode in self.modes])

    def position(self, index: int) -> int:
        """Storage position of a mode label."""
        try:
            return self._positions[index]
        except KeyError:
            raise KeyError(f"mode {index} is not part of system '{self.name}'") from None

    def mode(self, index: int) -> Eigenmode:
        """Look up a mode by label."""
        return self.modes[self.position(index)]

    def has_mode(self, index: int) -> bool:
        """Check whether a mode label belongs to the system."""
        return index in self._positions

    def chains(self) -> List[List[int]]:
        """Storage positions grouped into Jordan blocks (singletons for diagonal modes)."""
        blocks: List[List[int]] = []
        seen = set()
        for pos, mode in enumerate(self.modes):
            if pos in seen:
                continue
            if mode.branch is Branch.JORDAN and len(mode.chain) > 1:
                block = [self.position(i) for i in mode.chain]
                seen.update(block)
                blocks.append(block)
            else:
                seen.add(pos)
                blocks.append([pos])
        return blocks

    @property
    def has_jordan_blocks(self) -> bool:
        """Whether any block has length greater than one."""
        return any(len(block) > 1 for block in self.chains())

    def validate(self, max_chain: int = 4) -> Tuple[bool, str]:
        """Validate the system invariants.

        Args:
            max_chain: Longest supported Jordan chain

        Returns:
            Tuple of (is_valid, error_message)
        """
        if self.input_dim < 1:
            return False, "input_dim must be positive"
        if self.time_horizon_default <= 0:
            return False, "time_horizon_default must be positive"
        if len(self._positions) != len(self.modes):
            return False, "mode indices must be unique"
        for mode in self.modes:
            ok, message = mode.validate()
            if not ok:
                return ok, message
            if mode.control_trace.shape != (self.input_dim,):
                return False, f"mode {mode.index}: control trace must have length {self.input_dim}"
            if mode.eigenvalue.real > self.growth_bound + 1e-12:
                return False, f"mode {mode.index}: Re(mu) exceeds the growth bound"
            if mode.branch is Branch.JORDAN and len(mode.chain) > 1:
                if len(mode.chain) > max_chain:
                    return False, f"mode {mode.index}: chain longer than {max_chain}"
                for member in mode.chain:
                    if member not in self._positions:
                        return False, f"mode {mode.index}: chain member {member} missing"
                    other = self.mode(member)
                    if other.chain != mode.chain or other.eigenvalue != mode.eigenvalue:
                        return False, f"mode {mode.index}: inconsistent chain {mode.chain}"
        return True, ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert system to its JSON form."""
        return {
            'name': self.name,
            'growth_bound': float(self.growth_bound),
            'input_dim': int(self.input_dim),
            'time_horizon_default': float(self.time_horizon_default),
            'modes': [mode.to_dict() for mode in self.modes],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SpectralSystem':
        """Create system from its JSON form."""
        return cls(
            modes=tuple(Eigenmode.from_dict(m) for m in data.get('modes', [])),
            growth_bound=float(data['growth_bound']),
            input_dim=int(data['input_dim']),
            time_horizon_default=float(data.get('time_horizon_default', 1.0)),
            name=data.get('name', ''),
        )


@dataclass(frozen=True)
class TowerVector:
    """Finite coefficient vector on the Sobolev tower."""

    coefficients: Mapping[int, complex]
    tower_index: int = 0
    side: Side = Side.ADJOINT

    def __post_init__(self) -> None:
        object.__setattr__(self, 'coefficients',
                           {int(k): complex(v) for k, v in self.coefficients.items()})

    def to_array(self, system: SpectralSystem) -> np.ndarray:
        """Dense coefficients in the system's storage order."""
        dense = np.zeros(system.size, dtype=complex)
        for index, value in self.coefficients.items():
            dense[system.position(index)] = value
        return dense

    @classmethod
    def from_array(cls, system: SpectralSystem, values: Sequence[complex],
                   tower_index: int = 0, side: Side = Side.ADJOINT) -> 'TowerVector':
        """Build a vector from dense coefficients in storage order."""
        values = np.asarray(values, dtype=complex)
        return cls(dict(zip(system.indices, values)), tower_index, side)

    @classmethod
    def basis(cls, index: int, tower_index: int = 0,
              side: Side = Side.ADJOINT) -> 'TowerVector':
        """Unit vector on a single mode."""
        return cls({index: 1.0}, tower_index, side)

    def with_index(self, tower_index: int) -> 'TowerVector':
        """Same coefficients read in another tower level."""
        return TowerVector(dict(self.coefficients), tower_index, self.side)

    def scaled(self, factor: complex) -> 'TowerVector':
        """Multiply every coefficient by a scalar."""
        return TowerVector({k: factor * v for k, v in self.coefficients.items()},
                           self.tower_index, self.side)

    def belongs_to(self, system: SpectralSystem) -> bool:
        """Check every coefficient label against the system."""
        return all(system.has_mode(k) for k in self.coefficients)

    def to_dict(self) -> Dict[str, Any]:
        """Convert vector to a JSON-friendly dictionary."""
        return {
            'tower_index': self.tower_index,
            'side': self.side.value,
            'coefficients': [
                {'index': k, 're': v.real, 'im': v.imag}
                for k, v in sorted(self.coefficients.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TowerVector':
        """Create vector from a dictionary produced by to_dict."""
        coefficients = {
            int(item['index']): complex(item.get('re', 0.0), item.get('im', 0.0))
            for item in data.get('coefficients', [])
        }
        return cls(coefficients, int(data.get('tower_index', 0)),
                   Side(data.get('side', Side.ADJOINT.value)))


def zero_vector(tower_index: int = 0, side: Side = Side.PRIMAL,
                labels: Optional[Sequence[int]] = None) -> TowerVector:
    """Zero vector, optionally with explicit zero entries on the given labels."""
    return TowerVector({k: 0.0 for k in (labels or [])}, tower_index, side)
