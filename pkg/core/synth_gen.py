''' Created: 04/10/2026 '''

# Ground-truth SCMs, intervention plans and the three dataset families
# (linear, mlp3, blocks) plus the on-disk dataset container.

# External Dependencies
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union
import itertools
import os
import numpy as np
import yaml

# Internal Dependencies
from core.scm_core import LatentScm, compose_w, permutation_matrix, DEFAULT_THRESHOLD
from utilities.custom_exceptions import LatentExceptions as LE
from utilities.projection_builder import ProjectionBuilder

ER_DEGREES = (1, 2, 4)
WEIGHT_RANGE = (0.5, 2.0)
INTERVENTION_STD = 2.0
FORMAT_VERSION = 1
ENUMERATE_MASKS_UP_TO = 12

Seed = Union[int, np.random.SeedSequence]

def seed_sequence(rng_seed: Seed) -> np.random.SeedSequence:
    ''' Returns: rng_seed itself when already spawned, else a new SeedSequence. '''
    return rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)

Plan = List[Tuple[np.ndarray, int]]

@dataclass
class ProjectionSpec:
    ''' Purpose: Projection kind plus its drawn parameters. '''
    kind: str
    params: Dict[str, np.ndarray]
    d: int
    D: int

@dataclass
class GroundTruth:
    ''' Purpose: The SCM and projection that generated a dataset. '''
    scm: LatentScm
    projection: ProjectionSpec

    @property
    def d(self) -> int:
        return self.scm.d

    @property
    def D(self) -> int:
        return self.projection.D

@dataclass
class Dataset:
    ''' Purpose: Observations paired with intervention masks. z_true and the
        intervention values are generation-side records, withheld from training
        unless clamping is configured. '''
    x: np.ndarray
    masks: np.ndarray
    intervention_values: np.ndarray
    n_obs: int
    plan_masks: np.ndarray
    z_true: Optional[np.ndarray] = None
    image_side: Optional[int] = field(default=None)

    def __post_init__(self):
        if self.x.shape[0] != self.masks.shape[0] or self.masks.shape != self.intervention_values.shape:
            raise LE.DatasetFormatError(f'Row counts disagree: x {self.x.shape}, masks {self.masks.shape}, values {self.intervention_values.shape}.')
        if self.masks[:self.n_obs].any():
            raise LE.DatasetFormatError('Observational rows must carry all-zero masks.')
        declared = {tuple(m) for m in self.plan_masks.astype(int)}
        if any(tuple(m) not in declared for m in self.masks[self.n_obs:].astype(int)):
            raise LE.DatasetFormatError('Interventional row mask is not a declared intervention set.')

    @property
    def N(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.masks.shape[1]

    @property
    def D(self) -> int:
        return self.x.shape[1]

def sample_er_dag(d: int, expected_degree: int, rng_seed: Seed) -> Tuple[np.ndarray, np.ndarray]:
    ''' Returns: (binary adjacency, permutation matrix). Each pair of a uniformly
        random total order is an edge with probability min(1, 2 degree / (d - 1)),
        giving d * degree expected edges. '''
    if d < 2:
        raise LE.ArgumentError(f'ER DAG needs at least 2 nodes, got {d}.')
    if expected_degree not in ER_DEGREES:
        raise LE.ArgumentError(f'Expected degree must be one of {ER_DEGREES}, got {expected_degree}.')
    rng = np.random.default_rng(rng_seed)
    prob = min(1.0, 2.0 * expected_degree / (d - 1))
    p = permutation_matrix(rng.permutation(d))
    lower = np.tril(rng.random((d, d)) < prob, k=-1).astype(float)
    adjacency = np.asarray(compose_w(p, lower)).round().astype(int)
    return adjacency, p

def sample_parameters(support: np.ndarray, rng_seed: Seed, p: Optional[np.ndarray] = None) -> np.ndarray:
    ''' Returns: Edge matrix L with |weight| ~ U(0.5, 2.0) and a random sign on
        every edge of support. support is in node space when p is given (mapped
        back through L = P W^T P^T), otherwise it must already be in L-space. '''
    support = np.asarray(support, dtype=float)
    lower = support if p is None else np.asarray(p) @ support.T @ np.asarray(p).T
    if np.any(np.triu(lower) != 0):
        raise LE.ArgumentError('Support is not strictly lower triangular under the given ordering.')
    rng = np.random.default_rng(rng_seed)
    magnitude = rng.uniform(*WEIGHT_RANGE, size=lower.shape)
    sign = rng.choice((-1.0, 1.0), size=lower.shape)
    return (lower != 0) * magnitude * sign

def candidate_masks(d: int, single_node: bool) -> np.ndarray:
    if single_node:
        return np.eye(d, dtype=int)
    return np.asarray([m for m in itertools.product((0, 1), repeat=d) if any(m)], dtype=int)

def sample_intervention_plan(d: int, n_sets: int, samples_per_set: int, single_node: bool, rng_seed: Seed,
                             exclude: Optional[Sequence[np.ndarray]] = None) -> Plan:
    ''' Returns: n_sets distinct masks paired with samples_per_set. Multi-node
        masks include each node with probability 0.5, all-zero masks resampled;
        masks in exclude are never drawn. '''
    if n_sets < 1:
        raise LE.ArgumentError(f'Need at least one intervention set, got {n_sets}.')
    rng = np.random.default_rng(rng_seed)
    excluded = {tuple(np.asarray(m, dtype=int)) for m in (exclude or [])}
    if single_node or d <= ENUMERATE_MASKS_UP_TO:
        # Uniform over non-zero masks equals Bernoulli(0.5) conditioned on non-zero.
        candidates = [m for m in candidate_masks(d, single_node) if tuple(m) not in excluded]
        if n_sets > len(candidates):
            raise LE.ArgumentError(f'Requested {n_sets} intervention sets but only {len(candidates)} distinct masks exist.')
        chosen = rng.choice(len(candidates), size=n_sets, replace=False)
        return [(candidates[i].copy(), samples_per_set) for i in chosen]
    available = 2 ** d - 1 - len({m for m in excluded if any(m)})
    if n_sets > available:
        raise LE.ArgumentError(f'Requested {n_sets} intervention sets but only {available} distinct masks exist.')
    seen, plan = set(excluded), []
    while len(plan) < n_sets:
        mask = (rng.random(d) < 0.5).astype(int)
        if mask.any() and tuple(mask) not in seen:
            seen.add(tuple(mask))
            plan.append((mask, samples_per_set))
    return plan

def make_projection(kind: str, d: int, D: int, rng_seed: Seed) -> ProjectionSpec:
    projection = ProjectionBuilder.build(kind)
    if d > D:
        raise LE.ArgumentError(f'Latent dimension d={d} exceeds observation dimension D={D}.')
    params = projection.sample_params(d, D, np.random.default_rng(rng_seed))
    return ProjectionSpec(kind, params, d, projection.observation_dim(d, D))

def make_ground_truth(d: int, D: int, expected_degree: int, kind: str, rng_seed: Seed, log_sigma: float = 0.0) -> GroundTruth:
    ''' Returns: Random ER DAG, U(0.5, 2) edge weights and a random projection. '''
    dag_seed, param_seed, projection_seed = seed_sequence(rng_seed).spawn(3)
    adjacency, p = sample_er_dag(d, expected_degree, dag_seed)
    l = sample_parameters(adjacency, param_seed, p)
    scm = LatentScm(np.argmax(p, axis=1), l, log_sigma)
    return GroundTruth(scm, make_projection(kind, d, D, projection_seed))

def project(z: np.ndarray, spec: ProjectionSpec) -> np.ndarray:
    ''' Returns: Flattened observations for latents z of shape (..., d). '''
    return ProjectionBuilder.build(spec.kind).apply(z, spec.params)

def plan_masks(plan: Plan) -> np.ndarray:
    if not plan:
        return np.zeros((0, 0), dtype=int)
    return np.asarray([mask for mask, _ in plan], dtype=int)

def generate_dataset(gt: GroundTruth, n_obs: int, plan: Plan, rng_seed: Seed,
                     intervention_std: float = INTERVENTION_STD) -> Dataset:
    ''' Returns: n_obs observational rows followed by each plan set's rows.
        Intervened nodes are clamped to fresh N(0, intervention_std^2) values
        per row and their descendants propagate through the mutated W. '''
    d = gt.d
    rng = np.random.default_rng(rng_seed)
    blocks = [np.zeros((n_obs, d), dtype=int)] + [np.tile(np.asarray(mask, dtype=int), (count, 1)) for mask, count in plan]
    masks = np.concatenate(blocks, axis=0)
    values = rng.normal(0.0, intervention_std, size=masks.shape) * masks
    noise = rng.normal(size=masks.shape)
    z = gt.scm.sample(noise, masks, values)
    x = project(z, gt.projection)
    declared = plan_masks(plan) if plan else np.zeros((0, d), dtype=int)
    side = int(gt.projection.params['side'][0]) if gt.projection.kind == 'blocks' else None
    return Dataset(x, masks.astype(float), values, n_obs, declared, z, side)

def sample_under_mask(gt: GroundTruth, mask: np.ndarray, values: np.ndarray, rng_seed: Seed) -> Tuple[np.ndarray, np.ndarray]:
    ''' Returns: (z, x) for rows sharing one mask with given clamping values. '''
    rng = np.random.default_rng(rng_seed)
    masks = np.tile(np.asarray(mask, dtype=float), (values.shape[0], 1))
    z = gt.scm.sample(rng.normal(size=masks.shape), masks, values * masks)
    return z, project(z, gt.projection)

ARRAY_FILES = ('x', 'masks', 'intervention_values', 'z_true')

def save_dataset(directory: str, dataset: Dataset, gt: Optional[GroundTruth], metadata: Optional[Dict] = None) -> None:
    ''' Purpose: Writes the dataset container: metadata.yml, one .npy per array
        and a ground_truth/ folder (evaluation only). '''
    os.makedirs(directory, exist_ok=True)
    document = dict(metadata or {})
    document.update({
        'format_version': FORMAT_VERSION,
        'd': dataset.d,
        'D': dataset.D,
        'N': dataset.N,
        'n_obs': dataset.n_obs,
        'image_side': dataset.image_side,
        'projection': gt.projection.kind if gt is not None else document.get('projection'),
        'plan': [[int(v) for v in mask] for mask in dataset.plan_masks],
        'threshold': document.get('threshold', DEFAULT_THRESHOLD),
        'arrays': [name for name in ARRAY_FILES if getattr(dataset, name) is not None],
    })
    with open(os.path.join(directory, 'metadata.yml'), 'w') as file:
        yaml.safe_dump(document, file, default_flow_style=None, sort_keys=True)
    for name in document['arrays']:
        np.save(os.path.join(directory, f'{name}.npy'), getattr(dataset, name))
    if gt is not None:
        gt_dir = os.path.join(directory, 'ground_truth')
        os.makedirs(gt_dir, exist_ok=True)
        np.save(os.path.join(gt_dir, 'order.npy'), gt.scm.order)
        np.save(os.path.join(gt_dir, 'l.npy'), gt.scm.l)
        np.save(os.path.join(gt_dir, 'log_sigma.npy'), np.array([gt.scm.log_sigma], dtype=float))
        np.savez(os.path.join(gt_dir, 'projection.npz'), **gt.projection.params)

def load_dataset(directory: str) -> Tuple[Dataset, Optional[GroundTruth], Dict]:
    ''' Returns: (dataset, ground truth or None, metadata). Rejects containers
        whose metadata d/D/N disagree with the stored arrays. '''
    metadata_path = os.path.join(directory, 'metadata.yml')
    if not os.path.exists(metadata_path):
        raise LE.DatasetFormatError(f'{directory} has no metadata.yml.')
    with open(metadata_path, 'r') as file:
        metadata = yaml.safe_load(file)
    arrays = {}
    for name in metadata['arrays']:
        path = os.path.join(directory, f'{name}.npy')
        if not os.path.exists(path):
            raise LE.DatasetFormatError(f'{path} listed in metadata but missing.')
        arrays[name] = np.load(path)
    d, D, N = metadata['d'], metadata['D'], metadata['N']
    expected = {'x': (N, D), 'masks': (N, d), 'intervention_values': (N, d), 'z_true': (N, d)}
    for name, array in arrays.items():
        if array.shape != expected[name]:
            raise LE.DatasetFormatError(f'{name} has shape {array.shape}, metadata says {expected[name]}.')
    plan = np.asarray(metadata['plan'], dtype=int).reshape(-1, d)
    dataset = Dataset(arrays['x'], arrays['masks'], arrays['intervention_values'], metadata['n_obs'], plan,
                      arrays.get('z_true'), metadata.get('image_side'))
    gt = None
    gt_dir = os.path.join(directory, 'ground_truth')
    if os.path.isdir(gt_dir):
        with np.load(os.path.join(gt_dir, 'projection.npz')) as stored:
            params = {k: stored[k] for k in stored.files}
        scm = LatentScm(np.load(os.path.join(gt_dir, 'order.npy')), np.load(os.path.join(gt_dir, 'l.npy')),
                        float(np.load(os.path.join(gt_dir, 'log_sigma.npy'))[0]))
        if scm.d != d:
            raise LE.DatasetFormatError(f'Ground truth has {scm.d} nodes, metadata says {d}.')
        gt = GroundTruth(scm, ProjectionSpec(metadata['projection'], params, d, D))
    return dataset, gt, metadata
