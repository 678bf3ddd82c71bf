"""Result Models

This module contains the records returned by the duality engine, the observability
services and the model zoo, together with their table/JSON serializations.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .spectral_system import TowerVector
from .time_signal import TimeSignal

FINAL_STATE_COLUMNS = ('mode_index', 're', 'im', 'result_index')
CURVE_COLUMNS = ('time', 'probe_label', 're', 'im')
REPORT_COLUMNS = ('k', 'numerator', 'denominator', 'ratio', 'log_ratio', 'sqrt_k')


@dataclass(eq=False)
class FinalStateResult:
    """Generalized final state in primal coefficients."""

    state: TowerVector
    result_index: int
    norm_bound_used: float = float('nan')

    def rows(self) -> List[Tuple[Any, ...]]:
        """Table rows in mode order."""
        return [(k, float(v.real), float(v.imag), self.result_index)
                for k, v in sorted(self.state.coefficients.items())]


@dataclass(eq=False)
class CurveSample:
    """Pairings of the state curve against probe vectors on a time grid."""

    times: np.ndarray
    pairings: Dict[str, np.ndarray]
    split: Optional[Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]] = None

    def rows(self) -> List[Tuple[Any, ...]]:
        """Table rows, time-major then probe label."""
        labels = sorted(self.pairings)
        return [(float(t), label, float(self.pairings[label][i].real),
                 float(self.pairings[label][i].imag))
                for i, t in enumerate(self.times) for label in labels]


@dataclass(frozen=True)
class ModeRatio:
    """One row of a defect scan."""

    k: int
    numerator: float
    denominator: float

    @property
    def ratio(self) -> float:
        return self.numerator / self.denominator

    @property
    def log_ratio(self) -> float:
        return float(np.log(self.ratio))

    @property
    def sqrt_k(self) -> float:
        return float(np.sqrt(abs(self.k)))

    def row(self) -> Tuple[Any, ...]:
        return (self.k, self.numerator, self.denominator, self.ratio, self.log_ratio, self.sqrt_k)


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line y = slope * x + intercept."""
    slope: float
    intercept: float


@dataclass(eq=False)
class ObservabilityReport:
    """Per-mode observation ratios with their decay fit."""

    per_mode: List[ModeRatio]
    fit: Optional[LinearFit] = None
    corrected_fit: Optional[LinearFit] = None
    verdict: Optional[bool] = None
    tower_index: int = 0
    horizon: float = 1.0
    constant: Optional[float] = None

    def rows(self) -> List[Tuple[Any, ...]]:
        """Table rows ordered as stored."""
        return [entry.row() for entry in self.per_mode]

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to a JSON-friendly dictionary."""
        def fit_dict(fit: Optional[LinearFit]) -> Optional[Dict[str, float]]:
            return None if fit is None else {'slope': fit.slope, 'intercept': fit.intercept}

        return {
            'N': self.tower_index,
            'T': self.horizon,
            'constant': self.constant,
            'fit': fit_dict(self.fit),
            'corrected_fit': fit_dict(self.corrected_fit),
            'verdict': self.verdict,
            'rows': [dict(zip(REPORT_COLUMNS, entry.row())) for entry in self.per_mode],
        }


@dataclass(eq=False)
class NullControlResult:
    """Minimum-norm control and its verification."""

    control: TimeSignal
    residual: float
    gramian: np.ndarray
    condition: float
    adjoint_coefficients: np.ndarray


@dataclass(frozen=True)
class JumpEstimate:
    """Extrapolated jump of a derivative of the pairing curve at an atom."""
    time: float
    order: int
    value: complex


@dataclass(eq=False)
class RegularityReport:
    """Finite-difference regularity diagnostics of a pairing curve."""

    order: int
    times: np.ndarray
    values: np.ndarray
    derivative_estimates: Dict[int, np.ndarray]
    convergence_orders: Dict[int, float]
    jumps: List[JumpEstimate] = field(default_factory=list)
    atom_orders: Dict[int, float] = field(default_factory=dict)
    w_residual: float = 0.0
    in_w_space: bool = True

    def jump(self, time: float, order: int = 0) -> complex:
        """Look up the jump estimate at an atom."""
        for estimate in self.jumps:
            if estimate.order == order and abs(estimate.time - time) < 1e-12:
                return estimate.value
        raise KeyError(f"no jump estimate of order {order} at t={time}")


@dataclass(frozen=True)
class WConditionResult:
    """Residuals of the wave W-membership conditions at horizon T."""

    psi0_residual: float
    traced_residual: float
    landing_point: float
    branch: str
    reflections: int
    sign: float

    @property
    def residuals(self) -> Tuple[float, float]:
        return self.psi0_residual, self.traced_residual


@dataclass(eq=False)
class HeatPsiResult:
    """Truncated obstruction series on a spatial grid."""

    x: np.ndarray
    values: np.ndarray
    tail_bound: float
    norm: float

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(x), float(v)) for x, v in zip(self.x, self.values)]


def least_squares_line(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Fit y against x by least squares."""
    slope, intercept = np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 1)
    return LinearFit(float(slope), float(intercept))


@dataclass(eq=False)
class ExperimentTable:
    """Table produced by one command-line experiment, with scalar summary values."""

    columns: Tuple[str, ...]
    rows: List[Tuple[Any, ...]]
    summary: Dict[str, Any] = field(default_factory=dict)
    sidecars: Dict[str, 'ExperimentTable'] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """JSON form mirroring the CSV columns."""
        return {
            'columns': list(self.columns),
            'rows': [dict(zip(self.columns, row)) for row in self.rows],
            'summary': self.summary,
        }
