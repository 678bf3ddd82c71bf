"""
Numerical Configuration Manager

This module keeps the numerical knobs of the toolkit in one place. Defaults are fixed at
import time; a subset may be overridden at runtime (tests and the command line use this
to tighten or relax discretizations).
"""

from typing import Any, Dict, TypeVar, Union, overload

from quadrature import QuadratureOptions

T = TypeVar('T')


class NumericsConfig:
    """Numerical defaults plus runtime-overridable settings."""

    def __init__(self) -> None:
        """Initialize numerical configuration."""
        # Fixed identifiers
        self._defaults: Dict[str, Any] = {
            'APP_NAME': 'towerctl',
            'APP_VERSION': '1.0.0',
            'JORDAN_MAX_CHAIN': 4,
            'ASYMPTOTIC_MIN_K': 5,
        }

        # Runtime-overridable knobs
        self._settings: Dict[str, Any] = {
            # Quadrature
            'QUADRATURE_PANELS': 64,
            'QUADRATURE_ORDER': 16,
            'QUADRATURE_RATE_PER_PANEL': 4.0,
            'SINGULAR_GRADING_RATIO': 0.15,
            'SINGULAR_GRADING_LEVELS': 40,

            # Tolerances
            'ENDPOINT_TOLERANCE': 1e-10,
            'SVD_RTOL': 1e-10,
            'GRAM_RCOND': 1e-13,
            'GRAMIAN_CONDITION_LIMIT': 1e14,

            # Root finding
            'SECANT_MAX_ITERATIONS': 100,
            'SECANT_TOLERANCE': 1e-10,
            'SECANT_MAX_STEP': 0.5,

            # Models
            'HEATWAVE_QUADRATURE_PANELS': 32,
            'ALPHA_DISTANCE_FLOOR': 1e-16,
            'DEFAULT_N_GRID': 257,

            # Logging
            'LOG_LEVEL': 'INFO',
        }
        self._initial = self._settings.copy()

    @overload
    def get_default(self, key: str) -> Any: ...

    @overload
    def get_default(self, key: str, default: T) -> Union[Any, T]: ...

    def get_default(self, key: str, default: Any = None) -> Any:
        """Get a fixed default.

        Args:
            key: Configuration key
            default: Value returned when the key is unknown

        Returns:
            Configuration value
        """
        return self._defaults.get(key, default)

    @overload
    def get(self, key: str) -> Any: ...

    @overload
    def get(self, key: str, default: T) -> Union[Any, T]: ...

    def get(self, key: str, default: Any = None) -> Any:
        """Get an overridable setting.

        Args:
            key: Configuration key
            default: Value returned when the key is unknown

        Returns:
            Configuration value
        """
        return self._settings.get(key, default)

    def set(self, key: str, value: Any) -> bool:
        """Override a setting.

        Args:
            key: Configuration key
            value: New value

        Returns:
            True if the key is overridable and was set
        """
        if key in self._settings:
            self._settings[key] = value
            return True
        return False

    def quadrature_options(self) -> QuadratureOptions:
        """Composite-rule layout from the current quadrature knobs."""
        return QuadratureOptions(
            panels=int(self._settings['QUADRATURE_PANELS']),
            order=int(self._settings['QUADRATURE_ORDER']),
            rate_per_panel=float(self._settings['QUADRATURE_RATE_PER_PANEL']),
            grading_ratio=float(self._settings['SINGULAR_GRADING_RATIO']),
            grading_levels=int(self._settings['SINGULAR_GRADING_LEVELS']),
        )

    def reset(self) -> None:
        """Restore every overridable setting to its initial value."""
        self._settings = self._initial.copy()

    def get_all(self) -> Dict[str, Any]:
        """Get a snapshot of every default and setting."""
        snapshot = self._defaults.copy()
        snapshot.update(self._settings)
        return snapshot


# Global numerical configuration instance
numerics_config = NumericsConfig()
