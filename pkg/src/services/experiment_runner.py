"""Experiment Runner Service

This module contains the dispatcher behind the command-line front end. Each subcommand
builds its models, runs one experiment and returns an ExperimentTable; the runner writes
the table as CSV or JSON together with a run manifest and a run log, or a machine-readable
error record when the experiment fails.
"""

import json
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np
import scipy

from errors import ConfigValidationError, TowerControlError
from file_utils import FileUtils
from logger import app_logger
from models.experiment_config import ExperimentConfig
from models.model_states import WaveState
from models.results import CURVE_COLUMNS, FINAL_STATE_COLUMNS, REPORT_COLUMNS, ExperimentTable
from models.spectral_system import Side, TowerVector, zero_vector
from models.time_signal import GeneralizedInput, TimeSignal
from .duality_engine import construct_Wk_vector, final_state, regularity_probe, state_curve
from .heat_wave import EIGEN_TABLE_COLUMNS, eigenvalue_table
from .model_zoo import heat_psi, heat_psi_norm, make_neumann_heat, make_toy
from .numerics_config import numerics_config
from .observability import defect_scan, gramian_null_control
from .time_function_spaces import dual_norm, sobolev_norm
from .wave_characteristics import (
    trapezoid_derivative,
    wave_characteristics_solve,
    wave_energy,
    wave_W_condition,
)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_DOMAIN_ERROR = 2
EXIT_CONFIG_ERROR = 3

WAVE_PERTURBATIONS = (0.0, 1e-4, 1e-3, 1e-2)


def plain(value: Any) -> Any:
    """Convert numpy scalars, arrays and complex numbers into JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': float(value.real), 'im': float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    return value


def _distribution_version(name: str) -> str:
    try:
        return version(name)
    except PackageNotFoundError:
        return 'unknown'


def package_versions() -> Dict[str, str]:
    """Versions recorded in run manifests."""
    return {
        'towerctl': str(numerics_config.get_default('APP_VERSION')),
        'python': sys.version.split()[0],
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'jsonschema': _distribution_version('jsonschema'),
    }


def toy_demo(config: ExperimentConfig) -> ExperimentTable:
    """Final states and curve suprema of the integrator for delta_T and for u = 1."""
    system = make_toy()
    horizon = config.horizon
    z0 = zero_vector(0, Side.PRIMAL)
    before_end = np.linspace(0.0, horizon, config.n_grid)[:-1]
    probe = TowerVector.basis(0, 2, Side.ADJOINT)

    inputs = {
        'dirac_T': GeneralizedInput.dirac(horizon, horizon, [1.0]),
        'density_one': GeneralizedInput.from_density(
            TimeSignal.from_samples(horizon, np.ones(config.n_grid))),
    }
    rows, states, curves = [], [], []
    for name, u in inputs.items():
        result = final_state(system, z0, u)
        value = result.state.coefficients.get(0, 0.0)
        curve = state_curve(system, u, before_end, [probe], ['phi0'])
        supremum = float(np.max(np.abs(curve.pairings['phi0']))) if before_end.size else 0.0
        rows.append((name, float(value.real), float(value.imag), result.result_index, supremum))
        states.extend((name,) + row for row in result.rows())
        curves.extend((name,) + row for row in curve.rows())
    sidecars = {
        'final-states': ExperimentTable(('input',) + FINAL_STATE_COLUMNS, states),
        'curves': ExperimentTable(('input',) + CURVE_COLUMNS, curves),
    }
    return ExperimentTable(('input', 'final_state_re', 'final_state_im', 'result_index',
                            'curve_sup'), rows, {'T': horizon}, sidecars)


def heat_psi_experiment(config: ExperimentConfig) -> ExperimentTable:
    """Samples of the obstruction series psi with its norm computed two ways."""
    result = heat_psi(config.horizon, config.n_max, np.linspace(0.0, np.pi, config.n_grid))
    summary = {
        'T': config.horizon,
        'n_max': config.n_max,
        'norm_series': result.norm,
        'norm_quadrature': heat_psi_norm(config.horizon, config.n_max, 'quadrature'),
        'tail_bound': result.tail_bound,
    }
    return ExperimentTable(('x', 'psi'), result.rows(), summary)


def _dirac_exact_dual_norm(t0: float, horizon: float) -> float:
    """(H^1(0,T))* norm of delta_t0 from the Neumann Green function of 1 - d^2/dt^2."""
    return float(np.sqrt(np.cosh(t0) * np.cosh(horizon - t0) / np.sinh(horizon)))


def h1dual_norm_experiment(config: ExperimentConfig) -> ExperimentTable:
    """Truncated dual norms of Dirac inputs and of the unit density."""
    horizon, order, n_basis = config.horizon, config.order, config.n_basis
    rows = []
    for t0 in (0.0, 0.5 * horizon, horizon):
        u = GeneralizedInput.dirac(horizon, t0, [1.0])
        exact = _dirac_exact_dual_norm(t0, horizon) if order == 1 else float('nan')
        rows.append(('dirac', t0, order, n_basis, dual_norm(u, order, n_basis=n_basis), exact))
    unit = GeneralizedInput.from_density(TimeSignal.from_samples(horizon, np.ones(config.n_grid)))
    exact = float(np.sqrt(horizon)) if order >= 1 else float('nan')
    rows.append(('density_one', float('nan'), order, n_basis,
                 dual_norm(unit, order, n_basis=n_basis), exact))
    return ExperimentTable(('input', 't0', 'order', 'n_basis', 'dual_norm', 'exact'), rows,
                           {'T': horizon, 'coth_endpoint': float(np.sqrt(1.0 / np.tanh(horizon)))})


def wave_data(horizon: float, n_grid: int) -> WaveState:
    """Wave data with psi(0) = 0 and -psi(T) + phi_x(T) = 0 at the grid node nearest T.

    phi = cos(x / 2) and psi = c sin(x), with c matched to the discrete derivative.
    """
    if not 0.0 < horizon < np.pi:
        raise ConfigValidationError(f"wave-w builds its data for 0 < T < pi, got {horizon}")
    x = np.linspace(0.0, np.pi, n_grid)
    h = float(x[1] - x[0])
    phi = np.cos(0.5 * x)
    phi[-1] = 0.0
    derivative = trapezoid_derivative(phi, h)
    node = int(round(horizon / h))
    scale = derivative[node] / np.sin(x[node])
    return WaveState(phi, scale * np.sin(x))


def wave_w_experiment(config: ExperimentConfig) -> ExperimentTable:
    """W-condition residuals and boundary traces under perturbations of the velocity."""
    horizon = config.horizon
    base = wave_data(horizon, config.n_grid)
    x = base.x
    rows = []
    aligned = True
    for epsilon in WAVE_PERTURBATIONS:
        state = WaveState(base.phi, base.psi + epsilon * np.sin(x))
        condition = wave_W_condition(state, horizon)
        solution = wave_characteristics_solve(WaveState(state.phi, -state.psi), horizon)
        aligned = aligned and solution.aligned
        rows.append((epsilon, condition.psi0_residual, condition.traced_residual,
                     float(solution.trace[-1])))
    final = wave_characteristics_solve(base, horizon).state
    summary = {
        'T': horizon,
        'n_grid': config.n_grid,
        'aligned': aligned,
        'energy_initial': wave_energy(base),
        'energy_final': wave_energy(final),
    }
    return ExperimentTable(('epsilon', 'psi0_residual', 'traced_residual', 'trace_at_T'), rows,
                           summary)


def heatwave_eigs_experiment(config: ExperimentConfig) -> ExperimentTable:
    """Hyperbolic eigenvalues of the heat-wave system for k_min..k_max."""
    rows = eigenvalue_table(range(config.k_min, config.k_max + 1))
    return ExperimentTable(EIGEN_TABLE_COLUMNS, rows, {'count': len(rows)})


def defect_scan_experiment(config: ExperimentConfig) -> ExperimentTable:
    """Per-eigenvector observation ratios of the heat-wave system with the decay fit."""
    report = defect_scan(tower_index=config.state_index,
                         k_range=range(config.k_min, config.k_max + 1), horizon=config.horizon)
    summary = report.to_dict()
    summary.pop('rows')
    return ExperimentTable(REPORT_COLUMNS, report.rows(), summary)


def null_control_experiment(config: ExperimentConfig) -> ExperimentTable:
    """Minimum-norm control of a random initial state of the heat truncation."""
    system = make_neumann_heat(config.modes - 1)
    rng = np.random.default_rng(config.seed)
    z0 = TowerVector.from_array(system, rng.standard_normal(system.size), 0, Side.PRIMAL)
    grid = np.linspace(0.0, config.horizon, config.n_grid)
    result = gramian_null_control(system, z0, config.horizon, grid)
    values = result.control.evaluate(grid)[:, 0]
    rows = [(float(t), float(v.real), float(v.imag)) for t, v in zip(grid, values)]
    summary = {
        'T': config.horizon,
        'modes': config.modes,
        'seed': config.seed,
        'residual': result.residual,
        'condition': result.condition,
        'control_l2': sobolev_norm(result.control, 0),
    }
    return ExperimentTable(('time', 're', 'im'), rows, summary)


def regularity_probe_experiment(config: ExperimentConfig) -> ExperimentTable:
    """State curve of delta_{T/2} against a W_k probe, with a plain eigenvector as contrast."""
    system = make_neumann_heat(config.n_max)
    horizon = config.horizon
    u = GeneralizedInput.dirac(horizon, 0.5 * horizon, [1.0])
    grid = np.linspace(0.0, horizon, config.n_grid)
    probe = construct_Wk_vector(system, config.k, range(config.k + 1))
    report = regularity_probe(system, u, probe, grid, config.order)
    contrast = regularity_probe(system, u, TowerVector.basis(0, config.k + 1), grid, config.order)

    def jumps(entries):
        return [{'time': e.time, 'order': e.order, 'value': e.value} for e in entries]

    summary = {
        'k': config.k,
        'order': config.order,
        'w_residual': report.w_residual,
        'in_w_space': report.in_w_space,
        'convergence_orders': report.convergence_orders,
        'atom_orders': report.atom_orders,
        'jumps': jumps(report.jumps),
        'contrast_jumps': jumps(contrast.jumps),
    }
    rows = [(float(t), float(v.real), float(v.imag)) for t, v in zip(grid, report.values)]
    return ExperimentTable(('time', 're', 'im'), rows, summary)


class ExperimentRunner:
    """Service class dispatching experiments and writing their artifacts."""

    def __init__(self) -> None:
        """Initialize the runner with its subcommand table."""
        self.handlers: Dict[str, Callable[[ExperimentConfig], ExperimentTable]] = {
            'toy-demo': toy_demo,
            'heat-psi': heat_psi_experiment,
            'h1dual-norm': h1dual_norm_experiment,
            'wave-w': wave_w_experiment,
            'heatwave-eigs': heatwave_eigs_experiment,
            'defect-scan': defect_scan_experiment,
            'null-control': null_control_experiment,
            'regularity-probe': regularity_probe_experiment,
        }

    @staticmethod
    def _write_one(path: Path, table: ExperimentTable, output_format: str) -> None:
        if output_format == 'csv':
            written = FileUtils.write_csv(path, table.columns, table.rows)
        else:
            written = FileUtils.safe_write_json(path, plain(table.to_dict()))
        if not written:
            raise OSError(f"could not write {path}")

    def write_table(self, config: ExperimentConfig, table: ExperimentTable) -> Path:
        """Write the artifact, its sidecar tables and its manifest.

        Returns:
            Path to the artifact
        """
        directory = Path(config.output_dir)
        FileUtils.ensure_directory(directory)
        artifact = directory / f"{config.command}.{config.output_format}"
        self._write_one(artifact, table, config.output_format)
        for name, sidecar in table.sidecars.items():
            self._write_one(directory / f"{config.command}.{name}.{config.output_format}",
                            sidecar, config.output_format)
        FileUtils.write_manifest(artifact, plain({**config.to_dict(), 'summary': table.summary}),
                                 package_versions())
        return artifact

    def write_error(self, config: ExperimentConfig, error: BaseException) -> Dict[str, Any]:
        """Write the machine-readable error record to the output directory and stderr."""
        record = {
            'status': 'error',
            'error_type': type(error).__name__,
            'message': str(error),
            'command': config.command,
        }
        FileUtils.safe_write_json(Path(config.output_dir) / f"{config.command}.error.json", record)
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return record

    def run(self, config: ExperimentConfig) -> int:
        """Run one experiment.

        Args:
            config: Validated experiment configuration

        Returns:
            Exit code: 0 on success, 2 for domain errors, 3 for configuration errors,
            1 for unexpected failures
        """
        FileUtils.ensure_directory(config.output_dir)
        app_logger.set_level(str(numerics_config.get('LOG_LEVEL')))
        app_logger.attach_file_handler(Path(config.output_dir), f"{config.command}.log")
        try:
            ok, message = config.validate()
            if not ok:
                raise ConfigValidationError(message)
            app_logger.log_experiment_action(config.command, 'run', 'info',
                                             f"output {config.output_dir}")
            table = self.handlers[config.command](config)
            artifact = self.write_table(config, table)
            app_logger.log_experiment_action(config.command, 'write', 'success', str(artifact))
            return EXIT_OK
        except ConfigValidationError as e:
            app_logger.log_experiment_action(config.command, 'validate', 'error', str(e))
            self.write_error(config, e)
            return EXIT_CONFIG_ERROR
        except TowerControlError as e:
            app_logger.log_experiment_action(config.command, 'run', 'error', str(e))
            self.write_error(config, e)
            return EXIT_DOMAIN_ERROR
        except Exception as e:
            app_logger.error(f"Unexpected error in '{config.command}': {e}", exc_info=True)
            self.write_error(config, e)
            return EXIT_UNEXPECTED
        finally:
            app_logger.detach_file_handler()
