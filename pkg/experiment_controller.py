''' Created: 09/09/2023 '''

# External Dependencies
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict
from multiprocessing import get_context
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import os
import shutil
import numpy as np
import jax
import yaml
from tqdm import tqdm

# Internal Dependencies
from core.synth_gen import (GroundTruth, Dataset, make_ground_truth, sample_intervention_plan, generate_dataset,
                            sample_under_mask, save_dataset, load_dataset, seed_sequence)
from core.trainer import (TrainConfig, TrainState, TrainHistory, init_state, train, config_hash, clamp_to_ground_truth,
                          learned_graph, sample_interventional_images)
from core.evaluation import MetricsReport, METRIC_FIELDS, evaluate, null_graph_baseline
from utilities.config_builder import ExperimentConfig
from utilities.persistence import (save_checkpoint, load_checkpoint, checkpoint_config_hash, append_jsonl, read_jsonl, write_jsonl,
                                   write_json, write_csv, write_pgm)
from utilities.custom_exceptions import LatentExceptions as LE
from utilities.logger_formats import Log
from utilities.settings import Settings

# NOTE: Every verb is reproducible from (config, seeds): datasets draw from
#       SeedSequence(seed) and training noise from PRNGKey(seed) folded with the epoch.

TRACE_COLUMNS = ['epoch', 'elbo', 'e_shd', 'auroc', 'mcc', 'l_mse']
ABLATION_SAMPLES_PER_SET = 100

def prepare_output(directory: str, force: bool):
    ''' Purpose: Creates directory, refusing a non-empty one unless force. '''
    if os.path.isdir(directory) and os.listdir(directory):
        if not force:
            raise LE.OutputExists(f'{directory} is not empty, pass --force to overwrite.')
        Log.warn(f'Overwriting {directory}')
        shutil.rmtree(directory)
    os.makedirs(directory, exist_ok=True)

def seed_dir(root: str, seed: int) -> str:
    return os.path.join(root, f'seed_{seed}')

def run_jobs(func: Callable, jobs_args: List[tuple], jobs: int, progress: bool, desc: str) -> List:
    ''' Returns: func(*args) for every args tuple, in input order. Jobs above
        one run as spawned worker processes. '''
    if jobs < 1:
        raise LE.ArgumentError(f'jobs must be at least 1, got {jobs}.')
    if jobs == 1 or len(jobs_args) <= 1:
        return [func(*args) for args in tqdm(jobs_args, desc=desc, disable=not progress)]
    results = [None] * len(jobs_args)
    with ProcessPoolExecutor(max_workers=jobs, mp_context=get_context('spawn')) as pool:
        futures = {pool.submit(func, *args): k for k, args in enumerate(jobs_args)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=not progress):
            results[futures[future]] = future.result()
    return results

def build_dataset(config: ExperimentConfig, seed: int, n_sets: Optional[int] = None,
                  samples_per_set: Optional[int] = None) -> Tuple[Dataset, GroundTruth, Dict]:
    ''' Returns: (dataset, ground truth, metadata) for one seed of config. '''
    gt_seed, plan_seed, data_seed = seed_sequence(seed).spawn(3)
    gt = make_ground_truth(config.d, config.D, config.degree, config.projection, gt_seed)
    plan = sample_intervention_plan(config.d, n_sets or config.n_sets, samples_per_set or config.samples_per_set,
                                    config.single_node, plan_seed)
    dataset = generate_dataset(gt, config.n_obs, plan, data_seed, config.intervention_std)
    metadata = {'name': config.name, 'seed': seed, 'degree': config.degree, 'single_node': config.single_node,
                'intervention_std': config.intervention_std, 'config_hash': config.hash()}
    return dataset, gt, metadata

def dataset_for_seed(dataset_dir: str, seed: int) -> Tuple[Dataset, Optional[GroundTruth], Dict]:
    directory = seed_dir(dataset_dir, seed)
    if not os.path.isdir(directory):
        directory = dataset_dir
    return load_dataset(directory)

def seed_train_config(config: ExperimentConfig, gt: Optional[GroundTruth], seed: int) -> TrainConfig:
    return config.train_config(seed, None if gt is None else gt.scm.order.tolist())

def verify_resumable(config: ExperimentConfig, dataset_dir: str, out: str, seeds: List[int]):
    ''' Purpose: Refuses, before anything is written, a run directory holding a
        checkpoint from another training config. '''
    for seed in seeds:
        checkpoint = os.path.join(seed_dir(out, seed), 'checkpoint.npz')
        if not os.path.exists(checkpoint):
            continue
        _, gt, _ = dataset_for_seed(dataset_dir, seed)
        digest, found = config_hash(seed_train_config(config, gt, seed)), checkpoint_config_hash(checkpoint)
        if found != digest:
            raise LE.CheckpointMismatch(f'{checkpoint} has config hash {found[:12]}, current config is {digest[:12]}. '
                                        'Pass --force to start over.')

def metric_key(metric_seed: int, seed: int, epoch: int):
    return jax.random.fold_in(jax.random.fold_in(jax.random.PRNGKey(metric_seed), seed), epoch)

def summarize(records: Sequence[Dict]) -> Dict:
    ''' Returns: mean, std, median and count over seeds for every metric. '''
    summary = {}
    for name in METRIC_FIELDS:
        values = np.asarray([r[name] for r in records if r.get(name) is not None], dtype=float)
        if values.size:
            summary[name] = {'mean': float(values.mean()), 'std': float(values.std()),
                             'median': float(np.median(values)), 'n': int(values.size)}
    return summary

def write_summary(directory: str, rows: List[Dict], baselines: List[Dict], config_digest: str):
    summary = {'config_hash': config_digest, 'seeds': [r['seed'] for r in rows],
               'model': summarize(rows), 'null_graph': summarize(baselines)}
    write_json(os.path.join(directory, 'summary.json'), summary)
    write_csv(os.path.join(directory, 'summary.csv'),
              [{'metric': k, **v} for k, v in summary['model'].items()], ['metric', 'mean', 'std', 'median', 'n'])
    for name in ('e_shd', 'auroc', 'mcc'):
        if name in summary['model']:
            Log.metric({f'{name}_median': summary['model'][name]['median'], 'seeds': summary['model'][name]['n']})
    return summary

def cmd_generate(config: ExperimentConfig, out: str, seeds: List[int], force: bool, settings: Settings) -> str:
    ''' Purpose: Writes one dataset container per seed plus a manifest. '''
    prepare_output(out, force)
    for seed in tqdm(seeds, desc='Generating', disable=not settings.PROGRESS_BARS):
        dataset, gt, metadata = build_dataset(config, seed)
        save_dataset(seed_dir(out, seed), dataset, gt, metadata)
        Log.info(f'seed {seed}: N={dataset.N} d={dataset.d} D={dataset.D} edges={int(np.count_nonzero(gt.scm.l))}')
    write_json(os.path.join(out, 'manifest.json'), {'name': config.name, 'config_hash': config.hash(), 'seeds': seeds,
                                                    'document': config.document,
                                                    'directories': [f'seed_{s}' for s in seeds]})
    Log.status(f'Generated {len(seeds)} datasets at {out}')
    return out

def load_run(run_dir: str, seed: int) -> Tuple[TrainState, TrainConfig]:
    ''' Returns: Checkpointed state and its TrainConfig for one seed of a run. '''
    directory = seed_dir(run_dir, seed)
    config_path = os.path.join(directory, 'train_config.yml')
    if not os.path.exists(config_path):
        raise LE.ArgumentError(f'{directory} holds no trained run.')
    with open(config_path, 'r') as file:
        train_config = TrainConfig(**yaml.safe_load(file))
    metadata_path = os.path.join(directory, 'run.yml')
    with open(metadata_path, 'r') as file:
        run = yaml.safe_load(file)
    state = init_state(train_config, run['d'], run['D'])
    params, opt_state, epoch, trace = load_checkpoint(os.path.join(directory, 'checkpoint.npz'), state.params,
                                                      state.opt_state, config_hash(train_config))
    return TrainState(params, opt_state, epoch, trace, state.order, seed), train_config

def write_trace(directory: str, metrics_path: str):
    if not os.path.exists(metrics_path):
        return
    by_epoch = {record['epoch']: record for record in read_jsonl(metrics_path)}
    write_csv(os.path.join(directory, 'trace.csv'), [by_epoch[e] for e in sorted(by_epoch)], TRACE_COLUMNS)

def train_seed(config: ExperimentConfig, dataset_dir: str, out: str, seed: int, settings: Settings, progress: bool) -> Dict:
    ''' Returns: Final model and baseline rows for one seed. Resumes from the
        seed's checkpoint when one exists for the same config hash. '''
    dataset, gt, _ = dataset_for_seed(dataset_dir, seed)
    directory = seed_dir(out, seed)
    os.makedirs(directory, exist_ok=True)
    train_config = seed_train_config(config, gt, seed)
    if not train_config.learn and train_config.fixed_permutation is None:
        Log.warn(f'seed {seed}: no ground-truth ordering, fixing the identity ordering')
    digest = config_hash(train_config)
    state = init_state(train_config, dataset.d, dataset.D)
    checkpoint = os.path.join(directory, 'checkpoint.npz')
    if os.path.exists(checkpoint):
        params, opt_state, epoch, trace = load_checkpoint(checkpoint, state.params, state.opt_state, digest)
        state = TrainState(params, opt_state, epoch, trace, state.order, seed)
        Log.info(f'seed {seed}: resuming from epoch {epoch}')
    # Metadata is written only once a resume has passed the hash check.
    with open(os.path.join(directory, 'train_config.yml'), 'w') as file:
        yaml.safe_dump(asdict(train_config), file, sort_keys=True)
    with open(os.path.join(directory, 'run.yml'), 'w') as file:
        yaml.safe_dump({'d': dataset.d, 'D': dataset.D, 'seed': seed, 'config_hash': digest, 'dataset': dataset_dir}, file)
    metrics_path = os.path.join(directory, 'metrics.jsonl')

    def interval_metrics(current: TrainState) -> Dict:
        report = evaluate(current, train_config, dataset, gt, metric_key(0, seed, current.epoch), settings.METRICS_STRICT)
        record = {'seed': seed, 'epoch': current.epoch, 'elbo': current.trace[-1], 'latent_estimator': train_config.latent_estimator,
                  **report.to_record()}
        append_jsonl(metrics_path, record)
        Log.metric({k: record[k] for k in ('seed', 'epoch', 'elbo', 'e_shd', 'auroc', 'mcc') if record.get(k) is not None})
        return report.to_record()

    def write_checkpoint(current: TrainState):
        save_checkpoint(checkpoint, current.params, current.opt_state, current.epoch, current.trace, digest)

    history = TrainHistory()
    if config.oracle:
        if gt is None:
            raise LE.MissingGroundTruth('An oracle run needs the dataset ground truth.')
        state = clamp_to_ground_truth(state, gt)
    else:
        state, history = train(train_config, dataset, state, evaluate=interval_metrics, on_checkpoint=write_checkpoint,
                               progress=progress, float_checks=settings.FLOAT_CHECKS)
    write_checkpoint(state)
    write_trace(directory, metrics_path)
    report = evaluate(state, train_config, dataset, gt, metric_key(0, seed, state.epoch), settings.METRICS_STRICT)
    baseline = null_graph_baseline(gt) if gt is not None else MetricsReport()
    graph = learned_graph(state, train_config)
    np.savez(os.path.join(directory, 'learned_graph.npz'), binary_w=graph['binary_w'], w=graph['w'],
             sigma=np.array([graph['sigma']]), order=graph['order'])
    write_json(os.path.join(directory, 'final_metrics.json'), {'seed': seed, 'epoch': state.epoch, 'diverged': history.diverged,
                                                              'latent_estimator': train_config.latent_estimator, 'model': report.to_record(), 'null_graph': baseline.to_record()})
    return {'model': {'seed': seed, **report.to_record()}, 'null_graph': {'seed': seed, **baseline.to_record()}}

def cmd_train(config: ExperimentConfig, dataset_dir: str, out: str, seeds: List[int], jobs: int, force: bool,
              settings: Settings) -> str:
    ''' Purpose: Trains one run per seed and writes the aggregate over seeds.
        Without force an existing run directory is resumed, never overwritten. '''
    if force:
        prepare_output(out, True)
    os.makedirs(out, exist_ok=True)
    verify_resumable(config, dataset_dir, out, seeds)
    write_json(os.path.join(out, 'config.json'), config.document)
    write_json(os.path.join(out, 'manifest.json'), {'name': config.name, 'config_hash': config.hash(), 'seeds': seeds,
                                                    'dataset': dataset_dir})
    progress = settings.PROGRESS_BARS and jobs <= 1
    results = run_jobs(train_seed, [(config, dataset_dir, out, seed, settings, progress) for seed in seeds], jobs,
                       settings.PROGRESS_BARS, 'Seeds')
    write_summary(out, [r['model'] for r in results], [r['null_graph'] for r in results], config.hash())
    Log.status(f'Trained {len(seeds)} runs at {out}')
    return out

def cmd_eval(run_dir: str, dataset_dir: str, seeds: List[int], metric_seed: int, force: bool, settings: Settings) -> str:
    ''' Purpose: Full metric report plus the null-graph row for every seed of a
        trained run, written to eval.jsonl. An existing report is replaced only with force. '''
    report_path = os.path.join(run_dir, 'eval.jsonl')
    if os.path.exists(report_path) and not force:
        raise LE.OutputExists(f'{report_path} exists, pass --force to overwrite.')
    rows, models, baselines = [], [], []
    for seed in tqdm(seeds, desc='Evaluating', disable=not settings.PROGRESS_BARS):
        state, train_config = load_run(run_dir, seed)
        dataset, gt, _ = dataset_for_seed(dataset_dir, seed)
        report = evaluate(state, train_config, dataset, gt, metric_key(metric_seed, seed, state.epoch), settings.METRICS_STRICT)
        model = {'seed': seed, 'row': 'model', 'epoch': state.epoch, 'latent_estimator': train_config.latent_estimator,
                 **report.to_record()}
        rows.append(model)
        models.append(model)
        if gt is None:
            Log.warn(f'seed {seed}: no ground truth, null-graph row omitted')
        else:
            baseline = {'seed': seed, 'row': 'null_graph', 'epoch': state.epoch, **null_graph_baseline(gt).to_record()}
            rows.append(baseline)
            baselines.append(baseline)
        Log.metric({k: model[k] for k in ('seed', 'e_shd', 'auroc', 'mcc', 'obs_kl') if model.get(k) is not None})
    write_jsonl(report_path, rows)
    summary = {'metric_seed': metric_seed, 'model': summarize(models), 'null_graph': summarize(baselines)}
    write_json(os.path.join(run_dir, 'eval_summary.json'), summary)
    Log.status(f'Evaluated {len(seeds)} runs, report at {report_path}')
    return run_dir

def block_means(image: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    return np.asarray([image[top:bottom, left:right].mean() for top, bottom, left, right in boxes])

def compare_mask(state: TrainState, train_config: TrainConfig, gt: GroundTruth, mask: np.ndarray, n: int,
                 intervention_std: float, seed: int, index: int) -> Tuple[Dict, np.ndarray, np.ndarray]:
    ''' Returns: (comparison row, ground-truth mean, model mean) for one mask. '''
    values_seed, gt_seed = np.random.SeedSequence([seed, index]).spawn(2)
    values = np.random.default_rng(values_seed).normal(0.0, intervention_std, size=(n, gt.d)) * mask
    _, x_gt = sample_under_mask(gt, mask, values, gt_seed)
    _, model_mean = sample_interventional_images(state, train_config, mask, n, jax.random.fold_in(jax.random.PRNGKey(seed), index), values)
    gt_mean = x_gt.mean(axis=0)
    diff = np.abs(gt_mean - model_mean)
    row = {'seed': seed, 'set': index, 'mask': ''.join(str(int(v)) for v in mask),
           'mean_abs_diff': float(diff.mean()), 'max_abs_diff': float(diff.max())}
    if gt.projection.kind == 'blocks':
        side, boxes = int(gt.projection.params['side'][0]), gt.projection.params['boxes']
        block_error = np.abs(block_means(gt_mean.reshape(side, side), boxes) - block_means(model_mean.reshape(side, side), boxes))
        row['block_error_mean'], row['block_error_max'] = float(block_error.mean()), float(block_error.max())
    return row, gt_mean, model_mean

def cmd_sample_interventions(run_dir: str, dataset_dir: str, n_sets: int, samples_per_set: int, seeds: List[int],
                             out: str, force: bool, settings: Settings) -> str:
    ''' Purpose: Compares ground-truth and model mean observations under fresh
        masks outside the training plan, plus an observational sanity row. '''
    prepare_output(out, force)
    comparisons, sanity = [], []
    columns = ['seed', 'set', 'mask', 'mean_abs_diff', 'max_abs_diff', 'block_error_mean', 'block_error_max']
    for seed in tqdm(seeds, desc='Sampling', disable=not settings.PROGRESS_BARS):
        state, train_config = load_run(run_dir, seed)
        dataset, gt, metadata = dataset_for_seed(dataset_dir, seed)
        if gt is None:
            raise LE.MissingGroundTruth('Interventional comparisons need the dataset ground truth.')
        std = float(metadata.get('intervention_std', 2.0))
        plan = sample_intervention_plan(gt.d, n_sets, samples_per_set, bool(metadata.get('single_node', False)),
                                        np.random.SeedSequence([seed, 1]), exclude=list(dataset.plan_masks))
        row, _, _ = compare_mask(state, train_config, gt, np.zeros(gt.d), samples_per_set, std, seed, 0)
        sanity.append({**row, 'set': 'observational'})
        gt_means, model_means = [], []
        for k, (mask, n) in enumerate(plan, start=1):
            row, gt_mean, model_mean = compare_mask(state, train_config, gt, mask, n, std, seed, k)
            comparisons.append(row)
            gt_means.append(gt_mean)
            model_means.append(model_mean)
            if dataset.image_side is not None:
                side = dataset.image_side
                write_pgm(os.path.join(out, f'seed_{seed}', f'set_{k:02d}_gt.pgm'), gt_mean.reshape(side, side))
                write_pgm(os.path.join(out, f'seed_{seed}', f'set_{k:02d}_model.pgm'), np.clip(model_mean, 0, 1).reshape(side, side))
        os.makedirs(seed_dir(out, seed), exist_ok=True)
        np.savez(os.path.join(seed_dir(out, seed), 'means.npz'), masks=np.asarray([m for m, _ in plan]),
                 gt_means=np.asarray(gt_means), model_means=np.asarray(model_means))
    write_csv(os.path.join(out, 'comparisons.csv'), comparisons, columns)
    write_csv(os.path.join(out, 'sanity.csv'), sanity, columns)
    Log.metric({'sets': len(comparisons), 'mean_abs_diff': float(np.mean([r['mean_abs_diff'] for r in comparisons]))})
    Log.status(f'Interventional comparisons written to {out}')
    return out

def ablation_run(config: ExperimentConfig, n_sets: int, seed: int, settings: Settings) -> Dict:
    ''' Returns: Final metrics of one (intervention set count, seed) run trained in memory. '''
    dataset, gt, _ = build_dataset(config, seed, n_sets=n_sets, samples_per_set=ABLATION_SAMPLES_PER_SET)
    train_config = seed_train_config(config, gt, seed)
    state, history = train(train_config, dataset, progress=False, float_checks=settings.FLOAT_CHECKS)
    report = evaluate(state, train_config, dataset, gt, metric_key(0, seed, state.epoch), settings.METRICS_STRICT)
    return {'n_sets': n_sets, 'seed': seed, 'diverged': history.diverged, 'latent_estimator': train_config.latent_estimator,
            **report.to_record()}

def count_inversions(medians: List[Optional[float]], higher_is_better: bool) -> int:
    values = [v for v in medians if v is not None]
    steps = zip(values[:-1], values[1:])
    return sum(1 for a, b in steps if (b < a if higher_is_better else b > a))

def cmd_ablate_interventions(config: ExperimentConfig, out: str, seeds: List[int], jobs: int, force: bool,
                             settings: Settings) -> str:
    ''' Purpose: Sweeps the number of intervention sets (100 rows each) and
        writes per-run rows and a median table. '''
    prepare_output(out, force)
    jobs_args = [(config, n, seed, settings) for n in config.ablation_sets for seed in seeds]
    rows = run_jobs(ablation_run, jobs_args, jobs, settings.PROGRESS_BARS, 'Ablation')
    columns = ['n_sets', 'seed', 'diverged', 'latent_estimator', *METRIC_FIELDS]
    write_csv(os.path.join(out, 'ablation.csv'), rows, columns)
    medians = []
    for n in config.ablation_sets:
        summary = summarize([r for r in rows if r['n_sets'] == n])
        medians.append({'n_sets': n, **{k: v['median'] for k, v in summary.items()}})
    write_csv(os.path.join(out, 'ablation_summary.csv'), medians, ['n_sets', *METRIC_FIELDS])
    for name, higher_is_better in (('e_shd', False), ('auroc', True), ('mcc', True)):
        inversions = count_inversions([m.get(name) for m in medians], higher_is_better)
        Log.metric({'metric': name, 'inversions': inversions})
    Log.status(f'Ablation over {config.ablation_sets} written to {out}')
    return out
