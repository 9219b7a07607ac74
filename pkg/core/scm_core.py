''' Created: 02/10/2026 '''

# Linear-Gaussian SCM primitives. Convention: w[j][i] is the weight of edge j -> i,
# L is strictly lower triangular and W = P^T L^T P, so under the identity
# permutation parents always have the smaller index.

# External Dependencies
from dataclasses import dataclass, field
from typing import Optional, Sequence
import networkx as nx
import numpy as np
import jax.numpy as jnp

# Internal Dependencies
from utilities.custom_exceptions import LatentExceptions as LE

DEFAULT_THRESHOLD = 0.3

def is_permutation(p) -> bool:
    ''' Returns: True if p is a square binary matrix with one 1 per row and column. '''
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        return False
    if not np.isin(p, (0, 1)).all():
        return False
    return bool((p.sum(axis=0) == 1).all() and (p.sum(axis=1) == 1).all())

def permutation_matrix(order: Sequence[int]) -> np.ndarray:
    ''' Returns: Permutation matrix P with P[k, order[k]] = 1, so node order[k]
        sits at position k of the topological order of P^T L^T P. '''
    order = np.asarray(order, dtype=int)
    d = order.shape[0]
    if sorted(order.tolist()) != list(range(d)):
        raise LE.ArgumentError(f'Not a permutation of range({d}): {order.tolist()}')
    p = np.zeros((d, d))
    p[np.arange(d), order] = 1.0
    return p

def permutation_order(p) -> np.ndarray:
    ''' Returns: Index vector order with order[k] the node at position k. '''
    return np.asarray(jnp.argmax(jnp.asarray(p), axis=1), dtype=int)

def is_dag(support) -> bool:
    ''' Returns: True if the binary support of support has no directed cycle. '''
    graph = nx.from_numpy_array((np.abs(np.asarray(support)) > 0).astype(int), create_using=nx.DiGraph)
    return nx.is_directed_acyclic_graph(graph)

def topological_order(w) -> np.ndarray:
    ''' Returns: A topological order of the support of concrete w (Kahn's
        algorithm via networkx). Raises StructuralError on cyclic support. '''
    support = (np.abs(np.asarray(w)) > 0).astype(int)
    graph = nx.from_numpy_array(support, create_using=nx.DiGraph)
    try:
        return np.asarray(list(nx.topological_sort(graph)), dtype=int)
    except nx.NetworkXUnfeasible:
        raise LE.StructuralError('Weighted adjacency support contains a cycle.')

def compose_w(p, l):
    ''' Returns: W = P^T L^T P. Differentiable in both arguments. '''
    p, l = jnp.asarray(p), jnp.asarray(l)
    if p.ndim != 2 or p.shape != l.shape or p.shape[0] != p.shape[1]:
        raise LE.ArgumentError(f'Permutation {p.shape} and edge matrix {l.shape} disagree.')
    return p.T @ l.T @ p

def mutate_for_intervention(w, mask):
    ''' Returns: Copy of w with every column i where mask[i] = 1 zeroed. '''
    w, mask = jnp.asarray(w), jnp.asarray(mask)
    if mask.shape != (w.shape[0],) or w.shape[0] != w.shape[1]:
        raise LE.ArgumentError(f'Mask {mask.shape} does not match adjacency {w.shape}.')
    return w * (1 - mask)[None, :]

def ancestral_sample(w, log_sigma, noise, order=None, masks=None, values=None):
    ''' Returns: Latents z with z_i = sum_j w[j][i] z_j + exp(log_sigma) noise_i,
        filled in topological order. noise has shape (..., d); randomness only
        enters through it. Optional per-row masks zero the incoming edges of
        intervened nodes (a row-wise mutate_for_intervention) and optional
        values clamp those nodes. order must be given when w is traced. '''
    w, noise = jnp.asarray(w), jnp.asarray(noise)
    d = w.shape[0]
    if w.shape != (d, d) or noise.shape[-1] != d:
        raise LE.ArgumentError(f'Noise {noise.shape} does not match adjacency {w.shape}.')
    if values is not None and masks is None:
        raise LE.ArgumentError('Clamping values need intervention masks.')
    if order is None:
        order = topological_order(w)
    sigma = jnp.exp(log_sigma)
    z = jnp.zeros(noise.shape, dtype=jnp.result_type(w, noise))
    for k in range(d):
        i = order[k]
        parents = z @ w[:, i]
        if masks is not None:
            parents = parents * (1 - masks[..., i])
        z_i = parents + sigma * noise[..., i]
        if values is not None:
            z_i = jnp.where(masks[..., i] > 0, values[..., i], z_i)
        z = z.at[..., i].set(z_i)
    return z

def observational_covariance(w, log_sigma) -> np.ndarray:
    ''' Returns: sigma^2 (I - W^T)^-1 (I - W^T)^-T, the covariance of the
        zero-mean Gaussian the SCM induces. '''
    w = np.asarray(w, dtype=float)
    d = w.shape[0]
    inverse = np.linalg.inv(np.eye(d) - w.T)
    cov = np.exp(2.0 * float(log_sigma)) * inverse @ inverse.T
    if not np.isfinite(cov).all():
        raise LE.InternalError('Observational covariance is not finite.')
    return 0.5 * (cov + cov.T)

def gaussian_kl(cov_a, cov_b) -> float:
    ''' Returns: KL(N(0, cov_a) || N(0, cov_b)) in closed form. '''
    a, b = np.asarray(cov_a, dtype=float), np.asarray(cov_b, dtype=float)
    if a.ndim != 2 or a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise LE.ArgumentError(f'Covariances {a.shape} and {b.shape} disagree.')
    factors = []
    for name, m in (('cov_a', a), ('cov_b', b)):
        if not np.allclose(m, m.T, atol=1e-10):
            raise LE.ArgumentError(f'{name} is not symmetric.')
        try:
            factors.append(np.linalg.cholesky(m))
        except np.linalg.LinAlgError:
            raise LE.ArgumentError(f'{name} is not positive definite.')
    logdet_a, logdet_b = (2.0 * np.log(np.diag(f)).sum() for f in factors)
    d = a.shape[0]
    kl = 0.5 * (np.trace(np.linalg.solve(b, a)) - d + logdet_b - logdet_a)
    return max(float(kl), 0.0)

def binarize(w, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    ''' Returns: Binary matrix with 1 where |w| > threshold (strict). '''
    if threshold <= 0:
        raise LE.ArgumentError(f'Threshold must be positive, got {threshold}.')
    return (np.abs(np.asarray(w)) > threshold).astype(int)

@dataclass
class LatentScm:
    ''' Purpose: Ground-truth or sampled SCM, P held as an index vector. '''
    order: np.ndarray
    l: np.ndarray
    log_sigma: float
    p: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.order = np.asarray(self.order, dtype=int)
        self.l = np.asarray(self.l, dtype=float)
        if np.any(np.triu(self.l) != 0):
            raise LE.ArgumentError('Edge matrix L must be strictly lower triangular.')
        self.p = permutation_matrix(self.order)

    @property
    def d(self) -> int:
        return self.l.shape[0]

    @property
    def w(self) -> np.ndarray:
        return np.asarray(compose_w(self.p, self.l))

    def covariance(self) -> np.ndarray:
        return observational_covariance(self.w, self.log_sigma)

    def sample(self, noise: np.ndarray, masks: Optional[np.ndarray] = None, values: Optional[np.ndarray] = None) -> np.ndarray:
        ''' Returns: Ancestral samples under optional per-row interventions. '''
        return np.asarray(ancestral_sample(self.w, self.log_sigma, noise, self.order, masks, values))
