"""Tests for experiment configuration merging and model document validation."""

import json

import numpy as np
import pytest

from errors import ConfigValidationError
from models.experiment_config import ExperimentConfig
from models.time_signal import GeneralizedInput, TimeSignal
from services.config_manager import DEFAULT_SCHEMA_DIR, ConfigManager
from services.model_zoo import make_neumann_heat, make_neumann_wave


@pytest.fixture
def manager():
    return ConfigManager()


def _write(path, text):
    path.write_text(text, encoding='utf-8')
    return path


class TestConfigFile:
    def test_aliases_and_comments(self, manager, tmp_path):
        path = _write(tmp_path / "run.conf", "# heat run\nT = 0.5   # final time\nnmax = 12\n\n")
        assert manager.parse_config_file(path) == {'horizon': '0.5', 'n_max': '12'}

    def test_malformed_line(self, manager, tmp_path):
        path = _write(tmp_path / "bad.conf", "T 0.5\n")
        with pytest.raises(ConfigValidationError, match="bad.conf:1"):
            manager.parse_config_file(path)

    def test_missing_file(self, manager, tmp_path):
        with pytest.raises(ConfigValidationError):
            manager.parse_config_file(tmp_path / "absent.conf")

    def test_shipped_example_parses(self, manager):
        values = manager.parse_config_file(DEFAULT_SCHEMA_DIR.parent / "experiment_example.conf")
        assert values['horizon'] == '1.0'
        assert values['output_format'] == 'csv'


class TestBuildExperimentConfig:
    def test_precedence(self, manager, tmp_path):
        path = _write(tmp_path / "run.conf", "nmax = 50\nT = 0.25\n")
        assert manager.build_experiment_config('heat-psi').n_max == 200
        from_file = manager.build_experiment_config('heat-psi', config_file=path)
        assert from_file.n_max == 50 and from_file.horizon == 0.25
        flagged = manager.build_experiment_config('heat-psi', {'n_max': 10, 'horizon': None},
                                                  config_file=path)
        assert flagged.n_max == 10 and flagged.horizon == 0.25
        assert flagged.config_file == str(path)

    def test_output_dir_fallback(self, manager):
        config = manager.build_experiment_config('toy-demo', output_dir='elsewhere')
        assert config.output_dir == 'elsewhere'
        assert manager.build_experiment_config(
            'toy-demo', {'output_dir': 'mine'}, output_dir='elsewhere').output_dir == 'mine'

    def test_unknown_key(self, manager, tmp_path):
        path = _write(tmp_path / "run.conf", "colour = blue\n")
        with pytest.raises(ConfigValidationError, match="colour"):
            manager.build_experiment_config('toy-demo', config_file=path)

    def test_unreadable_value(self, manager):
        with pytest.raises(ConfigValidationError):
            manager.build_experiment_config('toy-demo', {'T': 'soon'})

    @pytest.mark.parametrize("command,flags", [
        ('toy-demo', {'T': -1.0}),
        ('toy-demo', {'format': 'xml'}),
        ('defect-scan', {'N': -1}),
        ('null-control', {'modes': 1}),
        ('heatwave-eigs', {'kmin': 1, 'kmax': 3}),
        ('defect-scan', {'kmin': -20, 'kmax': 20}),
        ('regularity-probe', {'order': 4}),
        ('regularity-probe', {'k': 9}),
    ])
    def test_invalid_values(self, manager, command, flags):
        with pytest.raises(ConfigValidationError):
            manager.build_experiment_config(command, flags)

    def test_negative_hyperbolic_range_is_allowed(self, manager):
        config = manager.build_experiment_config('heatwave-eigs', {'kmin': -20, 'kmax': -7})
        assert config.validate() == (True, "")

    def test_round_trip_through_dict(self):
        config = ExperimentConfig(command='wave-w', horizon=1.2)
        assert ExperimentConfig.from_dict({**config.to_dict(), 'extra': 1}).horizon == 1.2


class TestDocuments:
    def test_system_round_trip(self, manager, tmp_path):
        system = make_neumann_wave(2)
        path = tmp_path / "wave.json"
        assert manager.save_system(system, path)
        loaded = manager.load_system(path)
        assert loaded.indices == system.indices
        np.testing.assert_allclose(loaded.eigenvalues, system.eigenvalues)
        np.testing.assert_allclose(loaded.traces, system.traces)

    def test_system_schema_violation(self, manager, tmp_path):
        data = make_neumann_heat(2).to_dict()
        del data['input_dim']
        path = tmp_path / "heat.json"
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(ConfigValidationError, match="spectral_system"):
            manager.load_system(path)

    def test_system_invariant_violation(self, manager, tmp_path):
        data = make_neumann_heat(2).to_dict()
        data['modes'][1]['re'] = 5.0
        path = tmp_path / "heat.json"
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(ConfigValidationError, match="growth bound"):
            manager.load_system(path)

    def test_input_round_trip(self, manager, tmp_path):
        u = GeneralizedInput.dirac(2.0, 0.5, [1.0 + 1.0j])
        u.density = TimeSignal.from_samples(2.0, np.linspace(0.0, 1.0, 5))
        path = tmp_path / "input.json"
        assert manager.save_input(u, path)
        loaded = manager.load_input(path)
        assert loaded.dual_index == -1
        assert loaded.atoms[0].u0[0] == 1.0 + 1.0j
        np.testing.assert_allclose(loaded.density.values[:, 0], np.linspace(0.0, 1.0, 5))

    def test_unreadable_document(self, manager, tmp_path):
        path = _write(tmp_path / "input.json", "{not json")
        with pytest.raises(ConfigValidationError):
            manager.load_input(path)
