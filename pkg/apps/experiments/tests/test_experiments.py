"""
FRACNEHARI - Experiment Tests
Config files, validation, artifact runs, run records and the CLI command.
"""

import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.db import DatabaseError
from rest_framework.exceptions import ValidationError

from apps.core.exceptions import ArtifactIOError, ConfigError
from apps.core.utils import file_sha256
from apps.experiments.config import describe_keys, describe_text, read_config_file
from apps.experiments.models import ExperimentRun
from apps.experiments.serializers import ExperimentConfigSerializer, ExperimentRunSerializer
from apps.experiments.services import ExperimentService
from apps.experiments.tests.factories import ExperimentRunFactory

BASE = """
# problem
s=0.2
q=0.5
p=2.0
mu=0.05
n_elements={n}
"""


def write_config(tmp_path, n=4, extra='', name='run.env'):
    path = tmp_path / name
    path.write_text(BASE.format(n=n) + extra, encoding='utf-8')
    return path


@pytest.fixture
def no_records(settings):
    settings.FRACNEHARI_RECORD_RUNS = False


class TestConfigFile:
    """Reading flat key=value files."""

    def test_reads_values_and_lists(self, tmp_path):
        """Test scalars stay raw strings and list keys are split."""
        path = write_config(tmp_path, extra='eps_grid=1e-40, 1e-30,1e-20 ,1e-10\n')
        raw = read_config_file(path)
        assert raw['s'] == '0.2'
        assert raw['eps_grid'] == ['1e-40', '1e-30', '1e-20', '1e-10']

    def test_unknown_key(self, tmp_path):
        """Test unknown keys are refused by name."""
        path = write_config(tmp_path, extra='tolerance=3\n')
        with pytest.raises(ConfigError) as info:
            read_config_file(path)
        assert info.value.extra['unknown_keys'] == ['tolerance']

    def test_missing_file(self, tmp_path):
        """Test an unreadable file is a config error."""
        with pytest.raises(ConfigError):
            read_config_file(tmp_path / 'absent.env')

    def test_environment_does_not_override(self, tmp_path, monkeypatch):
        """Test environment variables never replace file values."""
        monkeypatch.setenv('q', '0.9')
        assert read_config_file(write_config(tmp_path))['q'] == '0.5'


class TestConfigValidation:
    """ExperimentConfigSerializer."""

    def raw(self, **overrides):
        data = {'kind': 'assemble', 's': '0.2', 'q': '0.5', 'p': '2.0', 'mu': '0.05', 'n_elements': '8'}
        data.update(overrides)
        return data

    def test_builds_config(self):
        """Test a valid mapping yields params, mesh spec and solver controls."""
        config = ExperimentService.validate(self.raw(seed='7', max_iters='40'))
        assert config.params.q == 0.5
        assert config.mesh().n_elements == 8
        assert config.solver.max_iters == 40 and config.solver.seed == 7
        assert config.option('count') == 4

    def test_invalid_q_names_invariant(self):
        """Test q=1.2 is rejected naming 0<q<1."""
        with pytest.raises(ValidationError) as info:
            ExperimentService.validate(self.raw(q='1.2'))
        assert '0<q<1' in str(info.value.detail)

    def test_sign_changing_regime_enforced(self):
        """Test the sign-changing kind refuses N <= 6s."""
        with pytest.raises(ValidationError) as info:
            ExperimentService.validate(self.raw(kind='solve-signchanging', s='0.3', q='0.9', p='2.0'))
        assert 'N>6s' in str(info.value.detail)

    def test_sign_changing_regime_accepted(self):
        """Test s=0.1, q=0.8 at the critical p passes."""
        config = ExperimentService.validate(self.raw(kind='solve-signchanging', s='0.1', q='0.8', p='1.5'))
        assert config.params.is_critical

    def test_hash_ignores_output_dir(self):
        """Test the config hash depends on content and seed but not on the output directory."""
        def digest(**overrides):
            serializer = ExperimentConfigSerializer(data=self.raw(**overrides))
            assert serializer.is_valid(), serializer.errors
            return serializer.config_hash()

        assert digest(output_dir='a') == digest(output_dir='b')
        assert digest(seed='1') != digest(seed='2')

    def test_level_bounds(self):
        """Test k_max cannot exceed the interior node count."""
        with pytest.raises(ValidationError):
            ExperimentService.validate(self.raw(kind='fountain-levels', k_max='12'))

    def test_short_eps_grid(self):
        """Test bubble fits need four values over two decades."""
        with pytest.raises(ValidationError):
            ExperimentService.validate(self.raw(kind='bubble-asymptotics', eps_grid=['0.1', '0.05', '0.02']))

    def test_bad_solver_control(self):
        """Test solver controls go through their own validation."""
        with pytest.raises(ValidationError) as info:
            ExperimentService.validate(self.raw(backtrack='1.5'))
        assert 'solver' in info.value.detail


class TestDescribe:
    """The describe listing."""

    def test_every_key_listed(self):
        """Test describe covers every field with its help."""
        text = describe_text()
        for row in describe_keys():
            assert row['key'] in text
            assert row['help']

    def test_required_and_defaults(self):
        """Test required keys and defaults are shown."""
        rows = {row['key']: row for row in describe_keys()}
        assert rows['s']['required']
        assert rows['n_elements']['default'] == 32
        assert len(rows['eps_grid']['default']) == 9


@pytest.mark.integration
@pytest.mark.usefixtures('no_records')
class TestRun:
    """Artifact runs end to end."""

    def test_assemble_manifest(self, tmp_path):
        """Test the manifest lists every artifact with its hash."""
        outcome = ExperimentService.run_file('assemble', write_config(tmp_path), output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 0
        names = [entry['name'] for entry in outcome.manifest['files']]
        assert names == ['config.json', 'operator.json']
        for entry in outcome.manifest['files']:
            assert entry['sha256'] == file_sha256(tmp_path / 'out' / entry['name'])
        operator = json.loads((tmp_path / 'out' / 'operator.json').read_text())
        assert len(operator['matrix']) == 3

    def test_rerun_is_byte_identical(self, tmp_path):
        """Test identical config and seed reproduce every file."""
        path = write_config(tmp_path)
        first = ExperimentService.run_file('assemble', path, output_dir=str(tmp_path / 'one'))
        second = ExperimentService.run_file('assemble', path, output_dir=str(tmp_path / 'two'))
        assert first.exit_code == second.exit_code == 0
        for name in ('config.json', 'operator.json', 'manifest.json'):
            assert (tmp_path / 'one' / name).read_bytes() == (tmp_path / 'two' / name).read_bytes()

    def test_thresholds(self, tmp_path):
        """Test thresholds with a pinned S write the audit fields and a table."""
        path = write_config(tmp_path, extra='s_estimate=1.5\n')
        outcome = ExperimentService.run_file('thresholds', path, output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 0
        data = json.loads((tmp_path / 'out' / 'thresholds.json').read_text())
        for key in ('tilde_mu', 'k_const', 'M_const', 'k_M_discrepancy'):
            assert key in data
        assert 'tilde_mu' in outcome.text

    def test_fibering_report(self, tmp_path):
        """Test the fibering report and its scan."""
        path = write_config(tmp_path, n=8, extra='scan_points=50\n')
        outcome = ExperimentService.run_file('fibering-report', path, output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 0
        report = json.loads((tmp_path / 'out' / 'fibering.json').read_text())
        assert report['projections'] == {'t_minus': 'N_plus', 't_plus': 'N_minus'}
        scan = (tmp_path / 'out' / 'fibering_scan.csv').read_text().splitlines()
        assert scan[0] == 't,energy' and len(scan) == 51

    def test_validation_exit_code(self, tmp_path):
        """Test an invalid q exits 2 with a diagnostic naming the invariant."""
        path = tmp_path / 'bad.env'
        path.write_text('s=0.2\nq=1.2\np=2.0\n', encoding='utf-8')
        outcome = ExperimentService.run_file('assemble', path, output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 2
        assert '0<q<1' in outcome.error['error']['message']
        assert outcome.error['error']['exit_code'] == 2

    def test_nonconvergence_exit_code(self, tmp_path):
        """Test budget exhaustion exits 3 and still writes the best iterate."""
        path = write_config(tmp_path, n=8, extra='max_iters=1\nresidual_tol=1e-14\n')
        outcome = ExperimentService.run_file('solve-positive', path, output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 3
        assert 'w0_best.json' in [entry['name'] for entry in outcome.manifest['files']]
        assert (tmp_path / 'out' / 'w0_best.json').exists()

    def test_io_exit_code(self, tmp_path, mocker):
        """Test a write failure exits 4."""
        mocker.patch('apps.experiments.services.write_json', side_effect=ArtifactIOError('disk full'))
        outcome = ExperimentService.run_file('assemble', write_config(tmp_path), output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 4
        assert outcome.error['error']['code'] == 'artifact_io'

    def test_unexpected_error_exit_code(self, tmp_path, mocker):
        """Test an unexpected exception exits 1 with a diagnostic."""
        mocker.patch.object(ExperimentService, 'run_assemble', side_effect=KeyError('boom'))
        outcome = ExperimentService.run_file('assemble', write_config(tmp_path), output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 1
        assert outcome.error['error']['code'] == 'keyerror'

    def test_solve_positive_artifacts(self, tmp_path):
        """Test both branch solutions land in the solutions table."""
        path = write_config(tmp_path, n=16, extra='residual_tol=1e-7\ntrace=True\n')
        outcome = ExperimentService.run_file('solve-positive', path, output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 0
        rows = (tmp_path / 'out' / 'solutions.csv').read_text().splitlines()
        assert rows[1].startswith('w0,') and rows[2].startswith('w1,')
        names = [entry['name'] for entry in outcome.manifest['files']]
        assert 'trace.jsonl' in names and 'solutions.json' in names


@pytest.mark.django_db
class TestRunRecording:
    """ExperimentRun persistence around runs."""

    def test_success_recorded(self, tmp_path, settings):
        """Test a successful run leaves a succeeded row with its manifest."""
        settings.FRACNEHARI_RECORD_RUNS = True
        outcome = ExperimentService.run_file('assemble', write_config(tmp_path), output_dir=str(tmp_path / 'out'))
        run = ExperimentRun.objects.get()
        assert run.status == ExperimentRun.SUCCEEDED
        assert run.config_hash == outcome.manifest['config_hash']
        assert run.files == ['config.json', 'operator.json']

    def test_failure_recorded(self, tmp_path, settings):
        """Test a validation failure is recorded with its exit code."""
        settings.FRACNEHARI_RECORD_RUNS = True
        path = tmp_path / 'bad.env'
        path.write_text('s=0.2\nq=1.2\np=2.0\n', encoding='utf-8')
        ExperimentService.run_file('assemble', path, output_dir=str(tmp_path / 'out'))
        run = ExperimentRun.objects.get()
        assert run.status == ExperimentRun.FAILED
        assert run.exit_code == 2
        assert run.error['error']['exit_code'] == 2

    def test_database_failure_keeps_exit_code(self, tmp_path, settings, mocker):
        """Test a failing insert is logged and the run still succeeds."""
        settings.FRACNEHARI_RECORD_RUNS = True
        mocker.patch.object(ExperimentRun.objects, 'create', side_effect=DatabaseError('locked'))
        outcome = ExperimentService.run_file('assemble', write_config(tmp_path), output_dir=str(tmp_path / 'out'))
        assert outcome.exit_code == 0

    def test_recording_disabled(self, tmp_path, settings):
        """Test FRACNEHARI_RECORD_RUNS=False skips the row."""
        settings.FRACNEHARI_RECORD_RUNS = False
        ExperimentService.run_file('assemble', write_config(tmp_path), output_dir=str(tmp_path / 'out'))
        assert not ExperimentRun.objects.exists()


@pytest.mark.django_db
class TestExperimentRunModel:
    """Manager queries and serialization of run rows."""

    def test_manager_filters(self):
        """Test succeeded, failed and for_config."""
        ok = ExperimentRunFactory()
        bad = ExperimentRunFactory(failed=True, config_hash=ok.config_hash)
        ExperimentRunFactory()
        assert set(ExperimentRun.objects.succeeded()) == set(ExperimentRun.objects.exclude(pk=bad.pk))
        assert list(ExperimentRun.objects.failed()) == [bad]
        assert set(ExperimentRun.objects.for_config(ok.config_hash)) == {ok, bad}

    def test_latest_for_kind(self):
        """Test the newest successful run of a kind is returned."""
        ExperimentRunFactory(kind='thresholds')
        newest = ExperimentRunFactory(kind='thresholds')
        ExperimentRunFactory(kind='thresholds', failed=True)
        assert ExperimentRun.objects.latest_for_kind('thresholds') == newest
        assert ExperimentRun.objects.latest_for_kind('multi-solve') is None

    def test_str_and_serializer(self):
        """Test the string form and the serialized files list."""
        run = ExperimentRunFactory(failed=True)
        assert str(run) == 'assemble [failed] exit=3'
        assert not run.succeeded
        data = ExperimentRunSerializer(run).data
        assert data['files'] == []
        assert data['error']['error']['code'] == 'non_convergence'


@pytest.mark.usefixtures('no_records')
class TestCommand:
    """manage.py experiment."""

    def test_describe(self):
        """Test describe prints the key table."""
        out = StringIO()
        call_command('experiment', 'describe', stdout=out)
        assert 'n_elements' in out.getvalue()

    def test_assemble(self, tmp_path):
        """Test a successful command reports the artifact count."""
        out = StringIO()
        call_command('experiment', 'assemble', '--config', str(write_config(tmp_path)),
                     '--out', str(tmp_path / 'out'), '--seed', '3', '--quiet', stdout=out)
        assert '2 artifacts' in out.getvalue()
        manifest = json.loads((tmp_path / 'out' / 'manifest.json').read_text())
        assert manifest['seed'] == 3

    def test_failure_exits_with_json(self, tmp_path):
        """Test a failure writes the JSON diagnostic to stderr and exits 2."""
        path = tmp_path / 'bad.env'
        path.write_text('s=0.2\nq=1.2\np=2.0\n', encoding='utf-8')
        err = StringIO()
        with pytest.raises(SystemExit) as info:
            call_command('experiment', 'assemble', '--config', str(path), '--out', str(tmp_path / 'out'), stderr=err)
        assert info.value.code == 2
        payload = json.loads(err.getvalue())
        assert payload['error']['exit_code'] == 2

    def test_missing_config(self):
        """Test a kind without --config exits 2."""
        with pytest.raises(SystemExit) as info:
            call_command('experiment', 'assemble', stderr=StringIO())
        assert info.value.code == 2
