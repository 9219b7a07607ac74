''' Created: 14/10/2026 '''

# External Dependencies
import json
import os
import numpy as np
import pytest
import yaml

# Internal Dependencies
from projections.BaseProjection import BaseProjection
from utilities.config_builder import ExperimentConfig
from utilities.custom_exceptions import LatentExceptions as LE
from utilities.generic_validators import GenericValidators
from utilities.logger_formats import Log
from utilities.persistence import append_jsonl, read_jsonl, read_pgm, to_builtin, write_csv, write_pgm
from utilities.projection_builder import PROJECTION_KINDS, ProjectionBuilder
from utilities.settings import Settings
import projections

BASE = {'name': 'unit', 'd': 3, 'D': 8, 'degree': 1, 'projection': 'linear', 'n_obs': 10, 'n_sets': 2,
        'samples_per_set': 5, 'seeds': [0]}

def test_settings_file_created_with_defaults(tmp_path):
    path = str(tmp_path / 'settings.yml')
    settings = Settings(path)
    with open(path) as file:
        stored = yaml.safe_load(file)
    assert stored['DEFAULT_JOBS'] == 1 and settings.PROGRESS_BARS is True

def test_settings_override_and_type_check(tmp_path):
    path = str(tmp_path / 'settings.yml')
    with open(path, 'w') as file:
        yaml.safe_dump({'DEFAULT_JOBS': 4, 'METRICS_STRICT': True}, file)
    settings = Settings(path)
    assert settings.DEFAULT_JOBS == 4 and settings.METRICS_STRICT is True
    with open(path, 'w') as file:
        yaml.safe_dump({'DEFAULT_JOBS': True}, file)
    with pytest.raises(LE.BadSettings):
        Settings(path)

def test_minimal_config_defaults():
    config = ExperimentConfig.from_dict(BASE)
    assert config.single_node is False and config.oracle is False
    assert config.ablation_sets == [2, 5, 10, 20]
    train = config.train_config(3)
    assert train.seed == 3 and train.decoder == 'linear' and train.mode == 'fixed_ordering'

def test_projection_picks_its_decoder():
    config = ExperimentConfig.from_dict({**BASE, 'projection': 'mlp3'})
    assert config.train_config(0).decoder == 'mlp3'

def test_document_permutation_wins_over_ground_truth_order():
    config = ExperimentConfig.from_dict({**BASE, 'fixed_permutation': [2, 1, 0]})
    assert config.train_config(0, [0, 1, 2]).fixed_permutation == [2, 1, 0]
    assert ExperimentConfig.from_dict(BASE).train_config(0, [1, 2, 0]).fixed_permutation == [1, 2, 0]

@pytest.mark.parametrize('change', [
    {'d': 1}, {'d': 9}, {'projection': 'blocks'}, {'projection': 'conv'}, {'degree': 3}, {'mode': 'annealed'},
    {'seeds': []}, {'seeds': [-1]}, {'lr': -0.1}, {'n_obs': -5}, {'unknown_key': 1}, {'d': 3.0},
    {'single_node': 1}, {'decoder': 'conv'}, {'fixed_permutation': [0, 0, 1]},
])
def test_invalid_configs_rejected(change):
    with pytest.raises(LE.InvalidConfigFile):
        ExperimentConfig.from_dict({**BASE, **change})

def test_missing_required_key():
    document = dict(BASE)
    del document['n_sets']
    with pytest.raises(LE.InvalidConfigFile, match='n_sets'):
        ExperimentConfig.from_dict(document)

def test_config_loaded_by_name(tmp_path):
    with open(tmp_path / 'unit.json', 'w') as file:
        json.dump(BASE, file)
    config = ExperimentConfig('unit', str(tmp_path))
    assert config.path.endswith('unit.json')
    assert config.hash() == ExperimentConfig.from_dict(BASE).hash()
    assert 'name: unit' in config.string()
    with pytest.raises(FileNotFoundError):
        ExperimentConfig('absent', str(tmp_path))

def test_malformed_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"name": ')
    with pytest.raises(LE.InvalidConfigFile):
        ExperimentConfig(str(path))

def test_shipped_configs_are_valid():
    directory = os.path.join(os.path.dirname(__file__), '..', 'experiment_configs')
    for filename in sorted(os.listdir(directory)):
        ExperimentConfig(os.path.join(directory, filename))

def test_validators():
    GenericValidators.validate_type('k', 1.5, (int, float))
    with pytest.raises(LE.InvalidConfigFile):
        GenericValidators.validate_type('k', True, (int,))
    with pytest.raises(LE.InvalidConfigFile):
        GenericValidators.validate_dimensions(3, 100, 'blocks', 1024)
    GenericValidators.validate_positive('horseshoe_scale', None)

def test_projection_builder():
    assert ProjectionBuilder.build('mlp3').kind == 'mlp3'
    with pytest.raises(LE.InvalidConfigFile):
        ProjectionBuilder.build('conv')

def test_projection_plugins_match_known_kinds():
    kinds = projections.discover()
    assert sorted(kinds) == sorted(PROJECTION_KINDS)
    assert ProjectionBuilder.module_name('mlp3') == kinds['mlp3'] == 'projections.Mlp3'

def test_projection_without_kind_is_refused():
    with pytest.raises(NotImplementedError):
        class Broken(BaseProjection):
            decoder_kind = 'linear'
            def sample_params(self, d, D, rng):
                return {}
            def apply(self, z, params):
                return z

def test_non_critical_handler():
    def missing():
        raise LE.MissingGroundTruth('none')
    assert LE.handle_non_critical(missing, False) is None
    with pytest.raises(LE.MissingGroundTruth):
        LE.handle_non_critical(missing, True)
    assert LE.handle_non_critical(lambda a, b: a + b, False, 1, 2) == 3
    def broken():
        raise LE.ArgumentError('shape')
    with pytest.raises(LE.ArgumentError):
        LE.handle_non_critical(broken, False)

def test_bad_step_handler_retries_then_diverges():
    attempts = []
    def flaky():
        attempts.append(1)
        if len(attempts) < 3:
            raise LE.NonFiniteGradient('nan')
        return 'ok'
    assert LE.handle_bad_step(flaky, retries=5) == 'ok' and len(attempts) == 3
    def broken():
        raise LE.NonFiniteGradient('nan')
    with pytest.raises(LE.Divergence):
        LE.handle_bad_step(broken, retries=2)

def test_jsonl_and_builtin_conversion(tmp_path):
    path = str(tmp_path / 'records' / 'metrics.jsonl')
    append_jsonl(path, {'epoch': 1, 'w': np.eye(2), 'value': np.float64(0.5)})
    append_jsonl(path, {'epoch': 2, 'w': None, 'value': 1.0})
    records = read_jsonl(path)
    assert [r['epoch'] for r in records] == [1, 2]
    assert records[0]['w'] == [[1.0, 0.0], [0.0, 1.0]]
    assert to_builtin((np.int64(3), [np.zeros(1)])) == [3, [[0.0]]]

def test_csv_leaves_missing_fields_empty(tmp_path):
    path = str(tmp_path / 'rows.csv')
    write_csv(path, [{'a': 1, 'b': None}, {'a': 2}], ['a', 'b'])
    with open(path) as file:
        assert file.read().splitlines() == ['a,b', '1,', '2,']

def test_pgm_round_trip(tmp_path):
    image = np.linspace(0.0, 1.0, 12).reshape(3, 4)
    path = str(tmp_path / 'image.pgm')
    write_pgm(path, image)
    np.testing.assert_allclose(read_pgm(path), image, atol=1 / 255)
    with pytest.raises(LE.ArgumentError):
        write_pgm(path, np.zeros(4))

def test_metric_line_format(capsys):
    Log.metric({'epoch': 10, 'elbo': -123.456789})
    assert 'epoch=10 elbo=-123.5' in capsys.readouterr().out

def test_warnings_go_to_stderr_and_missing_metrics_print_nan(capsys):
    Log.warn('careful')
    Log.metric({'epoch': 3, 'auroc': None})
    captured = capsys.readouterr()
    assert 'careful' in captured.err and 'careful' not in captured.out
    assert 'epoch=3 auroc=nan' in captured.out
