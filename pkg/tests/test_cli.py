''' Created: 15/10/2026 '''

# External Dependencies
import csv
import json
import os
import numpy as np
import pytest

# Internal Dependencies
from experiment_controller import build_dataset, run_jobs
from launcher import main
from utilities.config_builder import ExperimentConfig
from utilities.custom_exceptions import LatentExceptions as LE
from utilities.persistence import read_jsonl

SMOKE = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'experiment_configs', 'smoke.json'))

def run(*argv) -> int:
    return main(list(argv))

def read_bytes(path: str) -> bytes:
    with open(path, 'rb') as file:
        return file.read()

def csv_rows(path: str):
    with open(path, newline='') as file:
        return list(csv.DictReader(file))

def test_generate_is_reproducible_and_refuses_overwrite(settings, tmp_path, capsys):
    data = str(tmp_path / 'data')
    assert run('generate', '--config', SMOKE, '--out', data) == 0
    assert sorted(os.listdir(data)) == ['manifest.json', 'seed_0', 'seed_1']
    first = read_bytes(os.path.join(data, 'seed_0', 'x.npy'))
    capsys.readouterr()
    assert run('generate', '--config', SMOKE, '--out', data) == 1
    assert 'error=OutputExists message=' in capsys.readouterr().err
    assert run('generate', '--config', SMOKE, '--out', data, '--force') == 0
    assert read_bytes(os.path.join(data, 'seed_0', 'x.npy')) == first

def test_full_pipeline(settings, tmp_path):
    data, runs = str(tmp_path / 'data'), str(tmp_path / 'runs')
    assert run('generate', '--config', SMOKE, '--out', data) == 0
    assert run('train', '--config', SMOKE, '--dataset', data, '--out', runs) == 0
    seed_dir = os.path.join(runs, 'seed_0')
    for name in ('checkpoint.npz', 'final_metrics.json', 'metrics.jsonl', 'trace.csv', 'learned_graph.npz',
                 'train_config.yml', 'run.yml'):
        assert os.path.exists(os.path.join(seed_dir, name)), name
    assert [r['epoch'] for r in read_jsonl(os.path.join(seed_dir, 'metrics.jsonl'))] == [10, 20]
    with open(os.path.join(runs, 'summary.json')) as file:
        summary = json.load(file)
    assert summary['seeds'] == [0, 1] and summary['model']['e_shd']['n'] == 2
    with open(os.path.join(seed_dir, 'final_metrics.json')) as file:
        final = json.load(file)
    assert final['epoch'] == 20 and final['null_graph']['mcc'] is None
    assert final['latent_estimator'] == 'posterior'

    assert run('train', '--config', SMOKE, '--dataset', data, '--out', runs) == 0
    with open(os.path.join(seed_dir, 'final_metrics.json')) as file:
        assert json.load(file) == final

    assert run('eval', '--config', SMOKE, '--dataset', data, '--run', runs, '--metric-seed', '3') == 0
    rows = read_jsonl(os.path.join(runs, 'eval.jsonl'))
    assert [(r['seed'], r['row']) for r in rows] == [(0, 'model'), (0, 'null_graph'), (1, 'model'), (1, 'null_graph')]
    assert all(r['latent_estimator'] == 'posterior' for r in rows if r['row'] == 'model')
    assert run('eval', '--config', SMOKE, '--dataset', data, '--run', runs) == 1
    assert read_jsonl(os.path.join(runs, 'eval.jsonl')) == rows
    assert run('eval', '--config', SMOKE, '--dataset', data, '--run', runs, '--metric-seed', '3', '--force') == 0

    interventions = str(tmp_path / 'interventions')
    assert run('sample-interventions', '--config', SMOKE, '--dataset', data, '--run', runs, '--out', interventions) == 0
    comparisons = csv_rows(os.path.join(interventions, 'comparisons.csv'))
    assert len(comparisons) == 4 and all(float(r['mean_abs_diff']) >= 0 for r in comparisons)
    assert [r['set'] for r in csv_rows(os.path.join(interventions, 'sanity.csv'))] == ['observational'] * 2

def test_ablation_writes_rows_per_set_and_seed(settings, tmp_path):
    out = str(tmp_path / 'ablation')
    assert run('ablate-interventions', '--config', SMOKE, '--out', out, '--seeds', '0') == 0
    rows = csv_rows(os.path.join(out, 'ablation.csv'))
    assert [(r['n_sets'], r['seed']) for r in rows] == [('2', '0'), ('4', '0')]
    assert [r['n_sets'] for r in csv_rows(os.path.join(out, 'ablation_summary.csv'))] == ['2', '4']

@pytest.mark.parametrize('argv, error', [
    (['generate', '--config', 'absent_config'], 'FileNotFoundError'),
    (['generate', '--config', SMOKE, '--jobs', '0'], 'ArgumentError'),
    (['eval', '--config', SMOKE, '--run', 'nowhere', '--dataset', 'nowhere'], 'ArgumentError'),
])
def test_failures_print_one_error_line(settings, capsys, argv, error):
    assert run(*argv) == 1
    lines = capsys.readouterr().err.strip().splitlines()
    assert lines[-1].startswith(f'error={error} message=')

def test_invalid_config_exit_code(settings, tmp_path, capsys):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'name': 'bad'}))
    assert run('generate', '--config', str(path)) == 1
    assert 'error=InvalidConfigFile' in capsys.readouterr().err

def test_build_dataset_from_integer_seed():
    config = ExperimentConfig(SMOKE)
    dataset, gt, metadata = build_dataset(config, 0)
    assert dataset.N == 40 + 4 * 10 and dataset.D == 8 and gt.d == 3
    assert metadata['seed'] == 0 and metadata['config_hash'] == config.hash()
    again, _, _ = build_dataset(config, 0)
    np.testing.assert_array_equal(again.x, dataset.x)
    other, _, _ = build_dataset(config, 1)
    assert not np.array_equal(other.x, dataset.x)

def test_zero_jobs_rejected_before_any_work(settings, tmp_path, capsys):
    data = str(tmp_path / 'data')
    assert run('generate', '--config', SMOKE, '--out', data, '--jobs', '0') == 1
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith('error=ArgumentError message=')
    assert not os.path.exists(data)
    with pytest.raises(LE.ArgumentError):
        run_jobs(print, [(1,), (2,)], 0, False, 'Nothing')

def test_refused_resume_leaves_run_untouched(settings, tmp_path, capsys):
    data, runs = str(tmp_path / 'data'), str(tmp_path / 'runs')
    assert run('generate', '--config', SMOKE, '--out', data) == 0
    assert run('train', '--config', SMOKE, '--dataset', data, '--out', runs) == 0
    with open(SMOKE) as file:
        document = json.load(file)
    changed = tmp_path / 'smoke_lr.json'
    changed.write_text(json.dumps({**document, 'lr': 0.01}))
    names = ['config.json', 'manifest.json', 'summary.json'] + [os.path.join('seed_0', n) for n in
             ('train_config.yml', 'run.yml', 'metrics.jsonl', 'checkpoint.npz', 'final_metrics.json')]
    before = {name: read_bytes(os.path.join(runs, name)) for name in names}
    capsys.readouterr()
    assert run('train', '--config', str(changed), '--dataset', data, '--out', runs) == 1
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith('error=CheckpointMismatch message=')
    assert {name: read_bytes(os.path.join(runs, name)) for name in names} == before
    assert run('eval', '--config', SMOKE, '--dataset', data, '--run', runs) == 0
