"""Observability Setup Model

This module contains the description of a truncated observability inequality: the state
and input tower levels, the horizon and the projections realizing C, P and Q.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .spectral_system import SpectralSystem


@dataclass(eq=False)
class ObservabilitySetup:
    """Setup of ||P* S*_T C* y||_{X_-N} <= c ||Q* B* S*_t C* y||_{U_-M}.

    Mode sets of None stand for the identity; input_basis holds the columns of Q in U.
    """

    system: SpectralSystem
    state_index: int = 0
    input_index: int = 0
    horizon: float = 1.0
    output_modes: Optional[Sequence[int]] = None
    initial_modes: Optional[Sequence[int]] = None
    input_basis: Optional[np.ndarray] = None

    @property
    def nu(self) -> int:
        """Depth -min(0, N, M) of the initial-condition space."""
        return -min(0, self.state_index, self.input_index)

    def output_labels(self) -> List[int]:
        """Mode labels spanned by the range of C*."""
        if self.output_modes is None:
            return self.system.indices
        return [k for k in self.system.indices if k in set(self.output_modes)]

    def initial_labels(self) -> List[int]:
        """Mode labels kept by P."""
        if self.initial_modes is None:
            return self.system.indices
        return [k for k in self.system.indices if k in set(self.initial_modes)]

    def validate(self) -> Tuple[bool, str]:
        """Validate the setup against its system.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if self.horizon <= 0:
            return False, f"T must be positive, got {self.horizon}"
        labels = set(self.system.indices)
        for name, modes in (('output', self.output_modes), ('initial', self.initial_modes)):
            if modes is not None:
                unknown = sorted(set(modes) - labels)
                if unknown:
                    return False, f"{name} mode set names unknown modes {unknown}"
        if not self.output_labels():
            return False, "output mode set is empty"
        if self.input_basis is not None:
            basis = np.asarray(self.input_basis)
            if basis.ndim != 2 or basis.shape[0] != self.system.input_dim:
                return False, f"input basis must have {self.system.input_dim} rows"
            if basis.shape[1] == 0:
                return False, "input basis is empty"
        return True, ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert setup to dictionary, without the system itself."""
        return {
            'system': self.system.name,
            'N': self.state_index,
            'M': self.input_index,
            'T': self.horizon,
            'output_modes': None if self.output_modes is None else list(self.output_modes),
            'initial_modes': None if self.initial_modes is None else list(self.initial_modes),
            'input_basis_rank': None if self.input_basis is None
            else int(np.asarray(self.input_basis).shape[1]),
        }
