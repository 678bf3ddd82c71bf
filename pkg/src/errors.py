"""Exception Hierarchy

This module defines the errors raised by the toolkit services. Every domain error derives
from TowerControlError so the command-line front end can turn it into an error record.
"""

from typing import Optional


class TowerControlError(Exception):
    """Base class for all toolkit errors."""


class EndpointObstruction(TowerControlError):
    """A zero-trace dual pairing met a test function with a nonzero endpoint trace."""

    def __init__(self, message: str, trace: float = 0.0, endpoint: Optional[float] = None):
        super().__init__(message)
        self.trace = trace
        self.endpoint = endpoint


class InsufficientSupport(TowerControlError):
    """The W_k constraints leave only the zero vector on the requested support."""


class DegenerateOutput(TowerControlError):
    """The observation side vanishes identically on the truncation."""


class RootNotConverged(TowerControlError):
    """Secant iteration failed to reach the residual tolerance."""

    def __init__(self, seed: complex, last_iterate: complex, residual: float):
        super().__init__(
            f"root search from seed {seed:.6g} stopped at {last_iterate:.6g} "
            f"with residual {residual:.3e}"
        )
        self.seed = seed
        self.last_iterate = last_iterate
        self.residual = residual


class SingularGramian(TowerControlError):
    """The truncated controllability Gramian cannot be inverted reliably."""

    def __init__(self, condition: float):
        super().__init__(f"controllability Gramian is singular (condition estimate {condition:.3e})")
        self.condition = condition


class InvalidTowerIndex(TowerControlError, ValueError):
    """A tower index is incompatible with the requested operation."""


class ConfigValidationError(TowerControlError, ValueError):
    """An experiment configuration or document failed validation."""
