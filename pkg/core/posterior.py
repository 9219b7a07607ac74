''' Created: 06/10/2026 '''

# Variational family q(L, sigma), the logit network for the permutation
# relaxation, Gumbel-Sinkhorn sampling, Hungarian hardening and the priors.

# External Dependencies
from typing import Callable, Dict, List, Optional, Tuple
import math
import numpy as np
import jax
import jax.numpy as jnp
from jax.scipy.special import gammaln, logsumexp
from scipy.optimize import linear_sum_assignment

# Internal Dependencies
from utilities.custom_exceptions import LatentExceptions as LE

LOGIT_HIDDEN = 64
SINKHORN_TAU = 1.0
SINKHORN_ITERS = 20
L_FLOOR = 1e-10
HORSESHOE_LOG_K = -0.5 * math.log(2.0 * math.pi ** 3)
SIGMA_PRIOR = (0.0, 1.0)
Q_MEAN_STD, Q_LOG_STD = 0.1, -1.0

def q_length(d: int) -> int:
    return d * (d - 1) // 2 + 1

def nodes_from_q_length(n: int) -> int:
    d = int(round((1 + math.sqrt(1 + 8 * (n - 1))) / 2))
    if q_length(d) != n:
        raise LE.ArgumentError(f'Variational vector of length {n} does not match any node count.')
    return d

def default_horseshoe_scale(d: int) -> float:
    return 1.0 / math.sqrt(d)

def init_q(d: int, key) -> Dict[str, jnp.ndarray]:
    ''' Returns: q(L, sigma) parameters, means N(0, 0.1^2) and log-stds -1. '''
    n = q_length(d)
    return {'mean': Q_MEAN_STD * jax.random.normal(key, (n,)), 'log_std': jnp.full((n,), Q_LOG_STD)}

def draw_q(q: Dict[str, jnp.ndarray], noise) -> jnp.ndarray:
    noise = jnp.asarray(noise)
    if noise.shape != q['mean'].shape:
        raise LE.ArgumentError(f'Noise {noise.shape} does not match q of shape {q["mean"].shape}.')
    return q['mean'] + jnp.exp(q['log_std']) * noise

def unpack_draw(draw) -> Tuple[jnp.ndarray, jnp.ndarray]:
    ''' Returns: (L, log sigma); the first d(d-1)/2 coordinates fill the
        strictly-lower entries of L in row-major order. '''
    d = nodes_from_q_length(draw.shape[0])
    rows, cols = np.tril_indices(d, k=-1)
    l = jnp.zeros((d, d), dtype=draw.dtype).at[rows, cols].set(draw[:-1])
    return l, draw[-1]

def sample_l_sigma(q: Dict[str, jnp.ndarray], noise) -> Tuple[jnp.ndarray, jnp.ndarray]:
    ''' Returns: Reparameterised (L, log sigma) draw from q. '''
    return unpack_draw(draw_q(q, noise))

def free_entries(l) -> jnp.ndarray:
    l = jnp.asarray(l)
    if l.ndim == 1:
        return l
    rows, cols = np.tril_indices(l.shape[0], k=-1)
    return l[rows, cols]

def init_logit_mlp(d: int, key, hidden: int = LOGIT_HIDDEN) -> List[Dict[str, jnp.ndarray]]:
    ''' Returns: Two hidden layers of width hidden mapping (L entries, log sigma)
        to d*d logits, weights N(0, 1/fan_in) and zero biases. '''
    sizes = (q_length(d), hidden, hidden, d * d)
    keys = jax.random.split(key, len(sizes) - 1)
    return [{'w': jax.random.normal(k, (a, b)) / math.sqrt(a), 'b': jnp.zeros((b,))}
            for k, a, b in zip(keys, sizes[:-1], sizes[1:])]

def logit_mlp(l, log_sigma, weights: List[Dict[str, jnp.ndarray]]) -> jnp.ndarray:
    ''' Returns: Sinkhorn logits T of shape (d, d). '''
    l = jnp.asarray(l)
    d = l.shape[0]
    h = jnp.concatenate([free_entries(l), jnp.reshape(log_sigma, (1,))])
    for layer in weights[:-1]:
        h = jnp.tanh(h @ layer['w'] + layer['b'])
    return (h @ weights[-1]['w'] + weights[-1]['b']).reshape(d, d)

def sample_gumbel(key, d: int) -> jnp.ndarray:
    return jax.random.gumbel(key, (d, d))

def is_concrete(x) -> bool:
    return not isinstance(x, jax.core.Tracer)

def gumbel_sinkhorn(t, tau: float = SINKHORN_TAU, iters: int = SINKHORN_ITERS, gumbel_noise=None) -> jnp.ndarray:
    ''' Returns: exp of iters rounds of row then column log-normalisation of
        (t + gumbel_noise) / tau. Without noise this is the plain Sinkhorn
        operator. '''
    if tau <= 0 or iters < 1:
        raise LE.ArgumentError(f'Sinkhorn needs tau > 0 and iters >= 1, got tau={tau}, iters={iters}.')
    log_alpha = jnp.asarray(t) if gumbel_noise is None else jnp.asarray(t) + gumbel_noise
    log_alpha = log_alpha / tau
    for _ in range(iters):
        log_alpha = log_alpha - logsumexp(log_alpha, axis=1, keepdims=True)
        log_alpha = log_alpha - logsumexp(log_alpha, axis=0, keepdims=True)
    soft = jnp.exp(log_alpha)
    if is_concrete(soft) and not bool(jnp.all(jnp.isfinite(soft))):
        raise LE.InternalError('Sinkhorn normalisation overflowed.')
    return soft

def hungarian(soft) -> np.ndarray:
    ''' Returns: Permutation matrix maximising sum_i soft[i][perm(i)]. '''
    soft = np.asarray(soft, dtype=float)
    if not np.isfinite(soft).all():
        raise LE.ArgumentError('Hungarian assignment needs finite scores.')
    rows, cols = linear_sum_assignment(soft, maximize=True)
    hard = np.zeros_like(soft)
    hard[rows, cols] = 1.0
    return hard

def straight_through(soft, hard):
    ''' Returns: hard on the forward pass, soft's gradient on the backward pass. '''
    soft, hard = jnp.asarray(soft), jnp.asarray(hard)
    if soft.shape != hard.shape:
        raise LE.ArgumentError(f'Soft {soft.shape} and hard {hard.shape} permutations disagree.')
    return hard - jax.lax.stop_gradient(soft) + soft

def log_prior_l(l, horseshoe_scale: float) -> jnp.ndarray:
    ''' Returns: Horseshoe log-density surrogate summed over the free entries,
        log log(1 + 2 scale^2 / l^2) + log K - log scale with K = (2 pi^3)^-1/2.
        l may be a matrix (strictly-lower entries used) or a vector of entries. '''
    if horseshoe_scale <= 0:
        raise LE.ArgumentError(f'Horseshoe scale must be positive, got {horseshoe_scale}.')
    entries = jnp.maximum(jnp.abs(free_entries(l)), L_FLOOR)
    per_entry = jnp.log(jnp.log1p(2.0 * horseshoe_scale ** 2 / entries ** 2)) + HORSESHOE_LOG_K - math.log(horseshoe_scale)
    return jnp.sum(per_entry)

def log_prior_sigma(log_sigma, prior_mean: float = SIGMA_PRIOR[0], prior_std: float = SIGMA_PRIOR[1]) -> jnp.ndarray:
    if prior_std <= 0:
        raise LE.ArgumentError(f'Sigma prior std must be positive, got {prior_std}.')
    return -0.5 * ((log_sigma - prior_mean) / prior_std) ** 2 - math.log(prior_std * math.sqrt(2.0 * math.pi))

def log_q(q: Dict[str, jnp.ndarray], draw) -> jnp.ndarray:
    ''' Returns: Diagonal-Gaussian log-density of draw under q. '''
    z = (draw - q['mean']) * jnp.exp(-q['log_std'])
    return jnp.sum(-0.5 * z ** 2 - q['log_std'] - 0.5 * math.log(2.0 * math.pi))

def kl_q_lsigma(q: Dict[str, jnp.ndarray], draw, horseshoe_scale: float, sigma_prior: Tuple[float, float] = SIGMA_PRIOR,
                log_prior_l_fn: Optional[Callable] = None) -> jnp.ndarray:
    ''' Returns: Single-sample estimate log q(draw) - log p_L(draw) - log p_sigma(draw).
        log_prior_l_fn(entries) replaces the horseshoe when given. '''
    prior_l = log_prior_l_fn(draw[:-1]) if log_prior_l_fn is not None else log_prior_l(draw[:-1], horseshoe_scale)
    return log_q(q, draw) - prior_l - log_prior_sigma(draw[-1], *sigma_prior)

def perm_kl_surrogate(t, hard, coefficient: float = 1.0) -> jnp.ndarray:
    ''' Returns: coefficient * (<P_hard, T> - sum_rows logsumexp(T) + log d!). '''
    t = jnp.asarray(t)
    d = t.shape[0]
    return coefficient * (jnp.sum(hard * t) - jnp.sum(logsumexp(t, axis=1)) + gammaln(d + 1.0))
