"""Configuration Management Service

This module handles experiment configuration files and the JSON documents describing
spectral systems and generalized inputs.

Experiment files hold one `key = value` pair per line with `#` comments. Values are merged
as command defaults < file < command-line flags. Documents are validated with jsonschema
against the schemas in config/schemas.
"""

import json
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import jsonschema

from errors import ConfigValidationError
from file_utils import FileUtils
from logger import app_logger
from models.experiment_config import COMMAND_DEFAULTS, ExperimentConfig
from models.spectral_system import SpectralSystem
from models.time_signal import GeneralizedInput

PathLike = Union[str, Path]

DEFAULT_SCHEMA_DIR = Path(__file__).resolve().parents[2] / "config" / "schemas"

# Short names accepted in config files and on the command line
KEY_ALIASES = {
    'T': 'horizon',
    'N': 'state_index',
    'M': 'input_index',
    'nmax': 'n_max',
    'kmin': 'k_min',
    'kmax': 'k_max',
    'ngrid': 'n_grid',
    'nbasis': 'n_basis',
    'output': 'output_dir',
    'format': 'output_format',
}


class ConfigManager:
    """Service class for experiment configurations and model documents."""

    def __init__(self, schema_dir: Optional[PathLike] = None):
        """Initialize configuration manager.

        Args:
            schema_dir: Directory containing the *.schema.json files
        """
        self.schema_dir = Path(schema_dir) if schema_dir is not None else DEFAULT_SCHEMA_DIR
        self._schemas: Dict[str, Dict[str, Any]] = {}

    # Experiment configuration -------------------------------------------------------

    @staticmethod
    def canonical_key(key: str) -> str:
        """Map an alias or dashed flag name to the ExperimentConfig field name."""
        key = key.strip()
        return KEY_ALIASES.get(key, key.replace('-', '_'))

    def parse_config_file(self, path: PathLike) -> Dict[str, str]:
        """Parse a key = value experiment file.

        Raises:
            ConfigValidationError: If the file is missing or a line is malformed
        """
        if not os.path.exists(path):
            raise ConfigValidationError(f"config file not found: {path}")
        values: Dict[str, str] = {}
        with open(path, 'r', encoding='utf-8') as f:
            for number, raw in enumerate(f, start=1):
                line = raw.split('#', 1)[0].strip()
                if not line:
                    continue
                if '=' not in line:
                    raise ConfigValidationError(f"{path}:{number}: expected 'key = value'")
                key, value = (part.strip() for part in line.split('=', 1))
                if not key:
                    raise ConfigValidationError(f"{path}:{number}: empty key")
                values[self.canonical_key(key)] = value
        app_logger.log_config_action('experiment', 'load', 'success',
                                     f"{len(values)} keys from {path}")
        return values

    @staticmethod
    def _coerce(name: str, value: Any, kind: Any) -> Any:
        if value is None:
            return None
        try:
            if kind in (int, 'int'):
                return int(value)
            if kind in (float, 'float'):
                return float(value)
        except (TypeError, ValueError):
            kind_name = getattr(kind, '__name__', kind)
            raise ConfigValidationError(f"{name}: cannot read '{value}' as {kind_name}")
        return str(value)

    def build_experiment_config(self, command: str, flags: Optional[Dict[str, Any]] = None,
                                config_file: Optional[PathLike] = None,
                                output_dir: Optional[str] = None) -> ExperimentConfig:
        """Merge defaults, file values and flags into a validated ExperimentConfig.

        Args:
            command: Subcommand name
            flags: Command-line values; None entries are ignored
            config_file: Optional key = value file
            output_dir: Output directory used when neither file nor flags set one

        Raises:
            ConfigValidationError: On unknown keys, bad values or failed validation
        """
        merged: Dict[str, Any] = dict(COMMAND_DEFAULTS.get(command, {}))
        if output_dir is not None:
            merged['output_dir'] = output_dir
        if config_file is not None:
            merged.update(self.parse_config_file(config_file))
            merged['config_file'] = str(config_file)
        for key, value in (flags or {}).items():
            if value is not None:
                merged[self.canonical_key(key)] = value
        merged.pop('command', None)

        kinds = {f.name: f.type for f in fields(ExperimentConfig)}
        unknown = sorted(set(merged) - set(kinds))
        if unknown:
            raise ConfigValidationError(f"unknown configuration keys: {', '.join(unknown)}")
        typed = {key: self._coerce(key, value, kinds[key]) for key, value in merged.items()}

        config = ExperimentConfig(command=command, **typed)
        ok, message = config.validate()
        if not ok:
            app_logger.log_config_action('experiment', 'validate', 'error', message)
            raise ConfigValidationError(message)
        return config

    # Model documents ----------------------------------------------------------------

    def _schema(self, name: str) -> Dict[str, Any]:
        if name not in self._schemas:
            path = self.schema_dir / f"{name}.schema.json"
            if not path.exists():
                raise ConfigValidationError(f"schema not found: {path}")
            with open(path, 'r', encoding='utf-8') as f:
                self._schemas[name] = json.load(f)
        return self._schemas[name]

    def validate_document(self, name: str, data: Dict[str, Any]) -> None:
        """Validate a document against a named schema.

        Raises:
            ConfigValidationError: With the schema error path and message
        """
        try:
            jsonschema.validate(instance=data, schema=self._schema(name))
        except jsonschema.ValidationError as e:
            location = '/'.join(str(part) for part in e.absolute_path) or '<root>'
            app_logger.log_config_action(name, 'validate', 'error', f"{location}: {e.message}")
            raise ConfigValidationError(f"{name} document invalid at {location}: {e.message}")

    def _read_document(self, path: PathLike) -> Dict[str, Any]:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigValidationError(f"cannot read {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigValidationError(f"{path} must hold a JSON object")
        return data

    def load_system(self, path: PathLike) -> SpectralSystem:
        """Load and validate a SpectralSystem document."""
        data = self._read_document(path)
        self.validate_document('spectral_system', data)
        system = SpectralSystem.from_dict(data)
        ok, message = system.validate()
        if not ok:
            raise ConfigValidationError(message)
        app_logger.log_config_action('system', 'load', 'success',
                                     f"{system.size} modes from {path}")
        return system

    def save_system(self, system: SpectralSystem, path: PathLike) -> bool:
        """Validate and save a SpectralSystem document."""
        data = system.to_dict()
        self.validate_document('spectral_system', data)
        saved = FileUtils.safe_write_json(path, data)
        app_logger.log_config_action('system', 'save', 'success' if saved else 'error', str(path))
        return saved

    def load_input(self, path: PathLike) -> GeneralizedInput:
        """Load and validate a GeneralizedInput document."""
        data = self._read_document(path)
        self.validate_document('generalized_input', data)
        u = GeneralizedInput.from_dict(data)
        ok, message = u.validate()
        if not ok:
            raise ConfigValidationError(message)
        app_logger.log_config_action('input', 'load', 'success', str(path))
        return u

    def save_input(self, u: GeneralizedInput, path: PathLike) -> bool:
        """Validate and save a GeneralizedInput document."""
        data = u.to_dict()
        self.validate_document('generalized_input', data)
        saved = FileUtils.safe_write_json(path, data)
        app_logger.log_config_action('input', 'save', 'success' if saved else 'error', str(path))
        return saved
