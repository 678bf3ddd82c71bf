#!/usr/bin/env python3
"""Main Entry Point for towerctl

This is the command-line entry point of the spectral-truncation toolkit. It parses the
subcommand and its flags, merges them over an optional key = value config file, and hands
the validated configuration to the experiment runner.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add src and utils directories to Python path
src_path = Path(__file__).parent / "src"
utils_path = Path(__file__).parent / "utils"
sys.path.insert(0, str(src_path))
sys.path.insert(0, str(utils_path))

from errors import ConfigValidationError
from logger import app_logger
from models.experiment_config import COMMANDS, OUTPUT_FORMATS, ExperimentConfig
from services.config_manager import ConfigManager
from services.env_manager import env_manager
from services.experiment_runner import EXIT_CONFIG_ERROR, ExperimentRunner

# Flags of each subcommand beyond the common ones: (flag, destination, type, help)
COMMAND_FLAGS = {
    'toy-demo': [('--T', 'horizon', float, 'final time')],
    'heat-psi': [('--T', 'horizon', float, 'final time'),
                 ('--nmax', 'n_max', int, 'number of cosine modes')],
    'h1dual-norm': [('--T', 'horizon', float, 'final time'),
                    ('--order', 'order', int, 'Sobolev order of the test space'),
                    ('--nbasis', 'n_basis', int, 'number of trigonometric test modes')],
    'wave-w': [('--T', 'horizon', float, 'final time, 0 < T < pi')],
    'heatwave-eigs': [('--kmin', 'k_min', int, 'first hyperbolic mode'),
                      ('--kmax', 'k_max', int, 'last hyperbolic mode')],
    'defect-scan': [('--N', 'state_index', int, 'state tower index'),
                    ('--kmin', 'k_min', int, 'first hyperbolic mode'),
                    ('--kmax', 'k_max', int, 'last hyperbolic mode'),
                    ('--T', 'horizon', float, 'final time')],
    'null-control': [('--modes', 'modes', int, 'number of heat modes'),
                     ('--T', 'horizon', float, 'final time')],
    'regularity-probe': [('--k', 'k', int, 'W_k level of the probe'),
                         ('--order', 'order', int, 'highest derivative examined'),
                         ('--nmax', 'n_max', int, 'heat truncation'),
                         ('--T', 'horizon', float, 'final time')],
}


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subparser per experiment."""
    parser = argparse.ArgumentParser(
        prog='towerctl',
        description='Spectral-truncation experiments for control systems with irregular inputs.')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument('--config', dest='config_file', help='key = value configuration file')
        sub.add_argument('--output', dest='output_dir', help='output directory')
        sub.add_argument('--format', dest='output_format', choices=OUTPUT_FORMATS)
        sub.add_argument('--seed', dest='seed', type=int)
        sub.add_argument('--ngrid', dest='n_grid', type=int, help='time or space grid size')
        for flag, dest, kind, text in COMMAND_FLAGS[command]:
            sub.add_argument(flag, dest=dest, type=kind, help=text)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function.

    Returns:
        Exit code (0 for success, nonzero for errors)
    """
    args = build_parser().parse_args(argv)
    flags: Dict[str, Any] = vars(args).copy()
    command = flags.pop('command')
    config_file = flags.pop('config_file')

    env_manager.load_env()
    manager = ConfigManager()
    runner = ExperimentRunner()
    try:
        config = manager.build_experiment_config(
            command, flags, config_file, output_dir=str(env_manager.get_output_dir()))
    except ConfigValidationError as e:
        app_logger.log_config_action('experiment', 'validate', 'error', str(e))
        output_dir = flags.get('output_dir') or str(env_manager.get_output_dir())
        runner.write_error(ExperimentConfig(command=command, output_dir=output_dir), e)
        return EXIT_CONFIG_ERROR

    return runner.run(config)


if __name__ == "__main__":
    sys.exit(main())
