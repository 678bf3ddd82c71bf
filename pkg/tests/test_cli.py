"""End-to-end tests of the towerctl command line."""

import json

import numpy as np
import pytest

from file_utils import FileUtils
from main import main
from services.experiment_runner import EXIT_CONFIG_ERROR, EXIT_DOMAIN_ERROR, EXIT_OK


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv('TOWERCTL_OUTPUT_DIR', raising=False)
    return tmp_path


def _run(command, out, *flags):
    return main([command, '--output', str(out), *flags])


def _manifest(out, command):
    return json.loads((out / f"{command}.manifest.json").read_text(encoding='utf-8'))


class TestToyDemo:
    def test_csv_artifacts(self, workdir):
        out = workdir / "results"
        assert _run('toy-demo', out, '--ngrid', '33') == EXIT_OK
        rows = {row['input']: row for row in FileUtils.read_csv(out / "toy-demo.csv")}
        assert float(rows['dirac_T']['final_state_re']) == pytest.approx(1.0)
        assert int(rows['dirac_T']['result_index']) == -1
        assert float(rows['dirac_T']['curve_sup']) == 0.0
        assert float(rows['density_one']['final_state_re']) == pytest.approx(1.0)
        assert int(rows['density_one']['result_index']) == 0
        assert (out / "toy-demo.log").exists()

        manifest = _manifest(out, 'toy-demo')
        assert manifest['artifact'] == "toy-demo.csv"
        assert manifest['config']['command'] == 'toy-demo'
        assert 'numpy' in manifest['versions']

    def test_final_state_and_curve_tables(self, workdir):
        out = workdir / "results"
        assert _run('toy-demo', out, '--ngrid', '33') == EXIT_OK
        states = out / "toy-demo.final-states.csv"
        header = states.read_text(encoding='utf-8').splitlines()[0]
        assert header == "input,mode_index,re,im,result_index"
        rows = {row['input']: row for row in FileUtils.read_csv(states)}
        assert float(rows['dirac_T']['re']) == pytest.approx(1.0)
        assert int(rows['dirac_T']['result_index']) == -1
        assert int(rows['density_one']['mode_index']) == 0

        curves = out / "toy-demo.curves.csv"
        header = curves.read_text(encoding='utf-8').splitlines()[0]
        assert header == "input,time,probe_label,re,im"
        curve_rows = FileUtils.read_csv(curves)
        assert len(curve_rows) == 64
        assert {row['probe_label'] for row in curve_rows} == {'phi0'}

    def test_json_format(self, workdir):
        out = workdir / "results"
        assert _run('toy-demo', out, '--format', 'json', '--T', '2.0') == EXIT_OK
        table = json.loads((out / "toy-demo.json").read_text(encoding='utf-8'))
        assert table['columns'][0] == 'input'
        assert table['summary']['T'] == 2.0
        assert table['rows'][1]['final_state_re'] == pytest.approx(2.0)

    def test_repeated_runs_are_byte_identical(self, workdir):
        for name in ("first", "second"):
            assert _run('null-control', workdir / name, '--seed', '3', '--ngrid', '33') == EXIT_OK
        first = (workdir / "first" / "null-control.csv").read_bytes()
        assert first == (workdir / "second" / "null-control.csv").read_bytes()

    def test_output_dir_from_environment(self, workdir, monkeypatch):
        monkeypatch.setenv('TOWERCTL_OUTPUT_DIR', str(workdir / "from_env"))
        assert main(['toy-demo', '--ngrid', '9']) == EXIT_OK
        assert (workdir / "from_env" / "toy-demo.csv").exists()


class TestErrors:
    def test_invalid_horizon(self, workdir, capsys):
        out = workdir / "results"
        assert _run('toy-demo', out, '--T', '-1') == EXIT_CONFIG_ERROR
        record = json.loads((out / "toy-demo.error.json").read_text(encoding='utf-8'))
        assert record['status'] == 'error'
        assert record['error_type'] == 'ConfigValidationError'
        assert 'ConfigValidationError' in capsys.readouterr().err

    def test_missing_config_file(self, workdir):
        out = workdir / "results"
        code = _run('heat-psi', out, '--config', str(workdir / "absent.conf"))
        assert code == EXIT_CONFIG_ERROR
        assert (out / "heat-psi.error.json").exists()

    def test_config_file_values(self, workdir):
        out = workdir / "results"
        config = workdir / "run.conf"
        config.write_text("T = 0.5\nnmax = 12\nngrid = 9\n", encoding='utf-8')
        assert _run('heat-psi', out, '--config', str(config)) == EXIT_OK
        summary = _manifest(out, 'heat-psi')['config']['summary']
        assert summary['n_max'] == 12
        assert summary['T'] == 0.5

    def test_ill_conditioned_gramian(self, workdir):
        out = workdir / "results"
        assert _run('null-control', out, '--modes', '20') == EXIT_DOMAIN_ERROR
        record = json.loads((out / "null-control.error.json").read_text(encoding='utf-8'))
        assert record['error_type'] == 'SingularGramian'

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(['bogus'])


class TestExperiments:
    def test_heat_psi(self, workdir):
        out = workdir / "results"
        assert _run('heat-psi', out, '--nmax', '20', '--ngrid', '33') == EXIT_OK
        rows = FileUtils.read_csv(out / "heat-psi.csv")
        assert len(rows) == 33
        summary = _manifest(out, 'heat-psi')['config']['summary']
        assert summary['norm_series'] == pytest.approx(summary['norm_quadrature'], rel=1e-10)

    def test_h1dual_norm(self, workdir):
        out = workdir / "results"
        assert _run('h1dual-norm', out, '--nbasis', '200') == EXIT_OK
        rows = FileUtils.read_csv(out / "h1dual-norm.csv")
        dirac = [row for row in rows if row['input'] == 'dirac']
        assert len(dirac) == 3
        for row in dirac:
            assert float(row['dual_norm']) <= float(row['exact']) * (1.0 + 1e-9)
            assert float(row['dual_norm']) == pytest.approx(float(row['exact']), rel=5e-2)

    def test_wave_w(self, workdir):
        out = workdir / "results"
        assert _run('wave-w', out) == EXIT_OK
        for row in FileUtils.read_csv(out / "wave-w.csv"):
            epsilon = float(row['epsilon'])
            assert float(row['traced_residual']) == pytest.approx(epsilon, rel=1e-9, abs=1e-12)
            assert float(row['trace_at_T']) == pytest.approx(-epsilon, abs=1e-12)
        assert _manifest(out, 'wave-w')['config']['summary']['aligned'] is True

    def test_wave_w_rejects_long_horizons(self, workdir):
        out = workdir / "results"
        assert _run('wave-w', out, '--T', '4.0') == EXIT_CONFIG_ERROR

    def test_heatwave_eigs(self, workdir):
        out = workdir / "results"
        assert _run('heatwave-eigs', out, '--kmin', '10', '--kmax', '11') == EXIT_OK
        rows = FileUtils.read_csv(out / "heatwave-eigs.csv")
        assert len(rows) == 2

    def test_null_control(self, workdir):
        out = workdir / "results"
        assert _run('null-control', out, '--ngrid', '65') == EXIT_OK
        summary = _manifest(out, 'null-control')['config']['summary']
        assert summary['residual'] < 1e-6
        assert np.isfinite(summary['control_l2'])

    def test_regularity_probe(self, workdir):
        out = workdir / "results"
        assert _run('regularity-probe', out, '--k', '2', '--order', '1') == EXIT_OK
        summary = _manifest(out, 'regularity-probe')['config']['summary']
        assert summary['in_w_space'] is True
        assert len(FileUtils.read_csv(out / "regularity-probe.csv")) == 17
