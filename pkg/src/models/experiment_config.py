"""Experiment Configuration Model

This module contains the configuration record of one command-line experiment run.
"""

from dataclasses import dataclass, fields
from typing import Any, Dict, Optional, Tuple

COMMANDS = (
    'toy-demo',
    'heat-psi',
    'h1dual-norm',
    'wave-w',
    'heatwave-eigs',
    'defect-scan',
    'null-control',
    'regularity-probe',
)
OUTPUT_FORMATS = ('csv', 'json')

# Smallest |k| (or |k + 1|) the asymptotic heat-wave seeds are trusted for
HYPERBOLIC_MIN_K = 5

# Per-command defaults applied before the config file and the flags
COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    'wave-w': {'horizon': 1.5707963267948966, 'n_grid': 4097},
    'heat-psi': {'n_max': 200},
    'heatwave-eigs': {'k_min': 10, 'k_max': 10},
    'null-control': {'modes': 2},
    'regularity-probe': {'horizon': 1.0, 'n_grid': 17, 'n_max': 8},
    'h1dual-norm': {'n_basis': 400, 'order': 1},
}


@dataclass
class ExperimentConfig:
    """Effective configuration of an experiment run."""

    command: str
    horizon: float = 1.0
    state_index: int = 0
    input_index: int = 0
    n_max: int = 20
    k_min: int = 5
    k_max: int = 40
    n_grid: int = 257
    n_basis: int = 256
    seed: int = 0
    modes: int = 2
    k: int = 1
    order: int = 0
    output_dir: str = 'results'
    output_format: str = 'csv'
    config_file: Optional[str] = None

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def validate(self) -> Tuple[bool, str]:
        """Validate the configuration before dispatch.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if self.command not in COMMANDS:
            return False, f"unknown command '{self.command}'"
        if self.output_format not in OUTPUT_FORMATS:
            return False, f"format must be one of {OUTPUT_FORMATS}, got '{self.output_format}'"
        if not self.horizon > 0:
            return False, f"T must be positive, got {self.horizon}"
        for name in ('n_max', 'n_basis', 'modes', 'k'):
            if getattr(self, name) < 1:
                return False, f"{name} must be positive, got {getattr(self, name)}"
        if self.n_grid < 3:
            return False, f"n_grid must be at least 3, got {self.n_grid}"
        if self.k_min > self.k_max:
            return False, f"k_min ({self.k_min}) exceeds k_max ({self.k_max})"
        if self.seed < 0:
            return False, f"seed must be nonnegative, got {self.seed}"
        if self.command in ('heatwave-eigs', 'defect-scan'):
            if self.k_min < HYPERBOLIC_MIN_K - 1 and self.k_max > -HYPERBOLIC_MIN_K - 1:
                return False, (f"k range {self.k_min}..{self.k_max} reaches modes with "
                               f"|k| < {HYPERBOLIC_MIN_K} and |k + 1| < {HYPERBOLIC_MIN_K}")
        if self.command == 'defect-scan' and self.state_index < 0:
            return False, f"defect scans need N >= 0, got {self.state_index}"
        if self.command == 'null-control' and self.modes < 2:
            return False, f"null-control needs at least two modes, got {self.modes}"
        if self.command == 'regularity-probe' and not 0 <= self.order <= 3:
            return False, f"probe order must lie in [0, 3], got {self.order}"
        if self.command == 'regularity-probe' and self.k > self.n_max:
            return False, f"W_{self.k} probes need k <= n_max, got k={self.k}, n_max={self.n_max}"
        return True, ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary for the run manifest."""
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """Create config from a dictionary, ignoring unknown keys."""
        known = set(cls.field_names())
        return cls(**{key: value for key, value in data.items() if key in known})
