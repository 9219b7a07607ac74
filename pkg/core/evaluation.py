''' Created: 10/10/2026 '''

# Structure, parameter, latent and distribution metrics for a trained state,
# and the empty-graph reference row. Model node i is ground-truth node i: the
# intervention masks tie the labels together.

# External Dependencies
from dataclasses import asdict, dataclass, fields
from typing import Dict, Optional, Sequence
import numpy as np
import jax
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import average_precision_score, roc_auc_score

# Internal Dependencies
from core.scm_core import binarize, gaussian_kl
from core.synth_gen import Dataset, GroundTruth
from core.decoder import decode
from core import trainer as tr
from utilities.custom_exceptions import LatentExceptions as LE

@dataclass
class MetricsReport:
    ''' Purpose: One evaluation row; absent values are None. mcc uses identity
        matching in fixed-ordering mode, mcc_assignment always matches. '''
    e_shd: Optional[float] = None
    shd_c: Optional[float] = None
    auroc: Optional[float] = None
    auprc_g: Optional[float] = None
    auprc_w: Optional[float] = None
    mcc: Optional[float] = None
    mcc_assignment: Optional[float] = None
    l_mse: Optional[float] = None
    x_mse: Optional[float] = None
    obs_kl: Optional[float] = None
    tp: Optional[int] = None
    fp: Optional[int] = None
    tn: Optional[int] = None
    fn: Optional[int] = None
    tpr: Optional[float] = None
    fpr: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None

    def to_record(self) -> Dict:
        return asdict(self)

METRIC_FIELDS = tuple(f.name for f in fields(MetricsReport))

def check_pair(pred: np.ndarray, gt: np.ndarray) -> None:
    if np.shape(pred) != np.shape(gt) or np.ndim(gt) != 2:
        raise LE.ArgumentError(f'Predicted graph {np.shape(pred)} and ground truth {np.shape(gt)} disagree.')

def shd(pred: np.ndarray, gt: np.ndarray) -> int:
    ''' Returns: Insertions + deletions + reversals, a reversal counting once. '''
    check_pair(pred, gt)
    diff = np.abs((np.asarray(pred) != 0).astype(int) - (np.asarray(gt) != 0).astype(int))
    diff = diff + diff.T
    return int(np.count_nonzero(np.triu(diff, k=1)))

def skeleton(adjacency: np.ndarray) -> np.ndarray:
    a = (np.asarray(adjacency) != 0)
    return (a | a.T).astype(int)

def expected_shd(samples: Sequence[np.ndarray], gt: np.ndarray) -> float:
    if len(samples) < 1:
        raise LE.ArgumentError('Expected SHD needs at least one posterior sample.')
    return float(np.mean([shd(s, gt) for s in samples]))

def skeleton_shd_cpdag(samples: Sequence[np.ndarray], gt: np.ndarray) -> float:
    ''' Returns: Mean SHD between undirected skeletons. '''
    if len(samples) < 1:
        raise LE.ArgumentError('Skeleton SHD needs at least one posterior sample.')
    gt_skeleton = skeleton(gt)
    scores = []
    for s in samples:
        check_pair(s, gt)
        scores.append(np.count_nonzero(np.triu(skeleton(s) != gt_skeleton, k=1)))
    return float(np.mean(scores))

def off_diagonal(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    return matrix[~np.eye(matrix.shape[0], dtype=bool)]

def auroc_edges(edge_probs: np.ndarray, gt: np.ndarray) -> Optional[float]:
    ''' Returns: AUROC over ordered pairs j -> i, diagonal excluded, or None
        when the ground truth has a single class. '''
    check_pair(edge_probs, gt)
    labels = (off_diagonal(gt) != 0).astype(int)
    if labels.min() == labels.max():
        return None
    return float(roc_auc_score(labels, off_diagonal(edge_probs)))

def auprc(edge_scores: np.ndarray, gt: np.ndarray, weighted: bool = False) -> Optional[float]:
    ''' Returns: Step-wise area under the precision-recall curve. weighted
        scores are edge weights and ranked by magnitude. '''
    check_pair(edge_scores, gt)
    labels = (off_diagonal(gt) != 0).astype(int)
    if labels.min() == labels.max():
        return None
    scores = off_diagonal(edge_scores)
    return float(average_precision_score(labels, np.abs(scores) if weighted else scores))

def correlation_matrix(z_true: np.ndarray, z_pred: np.ndarray) -> np.ndarray:
    ''' Returns: Pearson correlations [true i, pred j]; zero-variance columns give 0. '''
    a = np.asarray(z_true, dtype=float)
    b = np.asarray(z_pred, dtype=float)
    a, b = a - a.mean(axis=0), b - b.mean(axis=0)
    a_norm, b_norm = np.linalg.norm(a, axis=0), np.linalg.norm(b, axis=0)
    with np.errstate(divide='ignore', invalid='ignore'):
        corr = (a.T @ b) / np.outer(a_norm, b_norm)
    corr[~np.isfinite(corr)] = 0.0
    corr[a_norm == 0, :] = 0.0
    corr[:, b_norm == 0] = 0.0
    return corr

def mcc(z_true: np.ndarray, z_pred: np.ndarray, assignment: bool = True) -> float:
    ''' Returns: Mean matched |correlation|; Hungarian matching unless
        assignment is False, then identity matching. '''
    if np.shape(z_true) != np.shape(z_pred) or np.shape(z_true)[0] < 2:
        raise LE.ArgumentError(f'MCC needs two equal N x d matrices with N >= 2, got {np.shape(z_true)} and {np.shape(z_pred)}.')
    corr = np.abs(correlation_matrix(z_true, z_pred))
    if not assignment:
        return float(np.mean(np.diag(corr)))
    rows, cols = linear_sum_assignment(corr, maximize=True)
    return float(corr[rows, cols].mean())

def edge_weight_mse(w_samples: Sequence[np.ndarray], gt_w: np.ndarray) -> float:
    gt_w = np.asarray(gt_w, dtype=float)
    return float(np.mean([np.mean((np.asarray(w) - gt_w) ** 2) for w in w_samples]))

def reconstruction_mse(state: tr.TrainState, config: tr.TrainConfig, dataset: Dataset, rng) -> float:
    ''' Returns: Mean squared error of decoded posterior-mean latents against x. '''
    z = tr.sample_latents(state, config, dataset.masks, dataset.intervention_values, config.latent_samples, rng, dataset.x)
    decoded = np.asarray(decode(z, state.params['decoder']))
    return float(np.mean((decoded - dataset.x) ** 2))

def observational_kl(state: tr.TrainState, config: tr.TrainConfig, gt: GroundTruth) -> float:
    ''' Returns: KL(predicted observational || ground-truth observational). '''
    return gaussian_kl(tr.posterior_mean_scm(state, config).covariance(), gt.scm.covariance())

def ground_truth_kl(state: tr.TrainState, config: tr.TrainConfig, gt: Optional[GroundTruth]) -> float:
    return observational_kl(state, config, require_ground_truth(gt))

def confusion(pred: np.ndarray, gt: np.ndarray) -> Dict:
    ''' Returns: Edge confusion counts over ordered pairs and the derived rates. '''
    check_pair(pred, gt)
    p, g = off_diagonal(pred) != 0, off_diagonal(gt) != 0
    tp, fp = int(np.sum(p & g)), int(np.sum(p & ~g))
    tn, fn = int(np.sum(~p & ~g)), int(np.sum(~p & g))
    ratio = lambda a, b: a / b if b else 0.0
    precision, recall = ratio(tp, tp + fp), ratio(tp, tp + fn)
    return {'tp': tp, 'fp': fp, 'tn': tn, 'fn': fn, 'tpr': recall, 'fpr': ratio(fp, fp + tn),
            'precision': precision, 'recall': recall, 'f1': ratio(2 * precision * recall, precision + recall)}

def require_ground_truth(gt: Optional[GroundTruth]) -> GroundTruth:
    if gt is None:
        raise LE.MissingGroundTruth('Dataset has no ground_truth folder.')
    return gt

def structure_metrics(w_samples: np.ndarray, config: tr.TrainConfig, gt: Optional[GroundTruth]) -> Dict:
    gt = require_ground_truth(gt)
    gt_binary = (np.abs(gt.scm.w) > 0).astype(int)
    binaries = [binarize(w, config.threshold) for w in w_samples]
    return {
        'e_shd': expected_shd(binaries, gt_binary),
        'shd_c': skeleton_shd_cpdag(binaries, gt_binary),
        'auroc': auroc_edges(np.mean(binaries, axis=0), gt_binary),
        'auprc_g': auprc(np.mean(binaries, axis=0), gt_binary),
        'auprc_w': auprc(np.mean(w_samples, axis=0), gt_binary, weighted=True),
        'l_mse': edge_weight_mse(w_samples, gt.scm.w),
    }

def latent_metrics(state: tr.TrainState, config: tr.TrainConfig, dataset: Dataset, rng) -> Dict:
    if dataset.z_true is None:
        raise LE.MissingGroundTruth('Dataset has no z_true array.')
    z_pred = tr.sample_latents(state, config, dataset.masks, dataset.intervention_values, config.latent_samples, rng, dataset.x)
    matched = mcc(dataset.z_true, z_pred, assignment=True)
    return {'mcc': matched if config.learn else mcc(dataset.z_true, z_pred, assignment=False), 'mcc_assignment': matched}

def graph_confusion(state: tr.TrainState, config: tr.TrainConfig, gt: Optional[GroundTruth]) -> Dict:
    gt = require_ground_truth(gt)
    return confusion(tr.learned_graph(state, config)['binary_w'], (np.abs(gt.scm.w) > 0).astype(int))

def evaluate(state: tr.TrainState, config: tr.TrainConfig, dataset: Dataset, gt: Optional[GroundTruth], rng,
             strict: bool = False) -> MetricsReport:
    ''' Returns: Full report for state. Metrics whose inputs are missing are
        omitted with a notice unless strict. Deterministic given rng. '''
    sample_key, latent_key, recon_key = jax.random.split(rng, 3)
    w_samples, _ = tr.sample_posterior(state, config, config.posterior_samples, sample_key)
    values = {}
    for group in (LE.handle_non_critical(structure_metrics, strict, w_samples, config, gt),
                  LE.handle_non_critical(latent_metrics, strict, state, config, dataset, latent_key),
                  LE.handle_non_critical(graph_confusion, strict, state, config, gt)):
        values.update(group or {})
    values['x_mse'] = LE.handle_non_critical(reconstruction_mse, strict, state, config, dataset, recon_key)
    values['obs_kl'] = LE.handle_non_critical(ground_truth_kl, strict, state, config, gt)
    return MetricsReport(**values)

def null_graph_baseline(gt: GroundTruth) -> MetricsReport:
    ''' Returns: The empty graph with zero weights scored like a posterior:
        constant edge scores, noise scale equal to the ground truth's. '''
    d = gt.d
    gt_binary = (np.abs(gt.scm.w) > 0).astype(int)
    empty = np.zeros((d, d), dtype=int)
    constant = np.full((d, d), 0.5)
    return MetricsReport(
        e_shd=expected_shd([empty], gt_binary),
        shd_c=skeleton_shd_cpdag([empty], gt_binary),
        auroc=auroc_edges(constant, gt_binary),
        auprc_g=auprc(constant, gt_binary),
        auprc_w=auprc(constant, gt_binary, weighted=True),
        l_mse=edge_weight_mse([np.zeros((d, d))], gt.scm.w),
        obs_kl=gaussian_kl(np.exp(2.0 * gt.scm.log_sigma) * np.eye(d), gt.scm.covariance()),
        **confusion(empty, gt_binary),
    )
