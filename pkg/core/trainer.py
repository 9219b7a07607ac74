''' Created: 09/10/2026 '''

# ELBO assembly and the optimisation loop, in learned-permutation and
# fixed-ordering modes.

# External Dependencies
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Tuple
import hashlib
import itertools
import numpy as np
import jax
import jax.numpy as jnp
from tqdm import tqdm
import yaml

# Internal Dependencies
from core.scm_core import LatentScm, ancestral_sample, binarize, compose_w, permutation_matrix, DEFAULT_THRESHOLD
from core import posterior as pst
from core.decoder import decode, decoder_from_projection, init_decoder, log_likelihood
from core.diff_engine import adam_init, adam_step, assert_finite, grad, leaf_names
from core.synth_gen import Dataset, GroundTruth
from utilities.custom_exceptions import LatentExceptions as LE
from utilities.logger_formats import Log

LEARN = 'learn_permutation'
FIXED = 'fixed_ordering'
MODES = (LEARN, FIXED)
SATURATED_LOGIT = 40.0
ORACLE_LOG_STD = -20.0
ORACLE_LOG_OBS_NOISE = -5.0
LATENT_ESTIMATORS = ('posterior', 'prior')

@dataclass
class TrainConfig:
    ''' Purpose: Every setting that shapes a training run. batch_size 0 means
        full batch; horseshoe_scale None means 1/sqrt(d); fixed_permutation None
        means the identity ordering. '''
    epochs: int = 5000
    lr: float = 0.0008
    batch_size: int = 0
    mode: str = FIXED
    seed: int = 0
    sinkhorn_tau: float = pst.SINKHORN_TAU
    sinkhorn_iters: int = pst.SINKHORN_ITERS
    horseshoe_scale: Optional[float] = None
    sigma_prior_mean: float = pst.SIGMA_PRIOR[0]
    sigma_prior_std: float = pst.SIGMA_PRIOR[1]
    perm_kl_coefficient: float = 1.0
    threshold: float = DEFAULT_THRESHOLD
    clamp_interventions: bool = False
    decoder: str = 'linear'
    eval_interval: int = 50
    checkpoint_interval: int = 500
    posterior_samples: int = 100
    latent_samples: int = 64
    bad_step_retries: int = 5
    latent_estimator: str = 'posterior'
    fixed_permutation: Optional[List[int]] = None

    def __post_init__(self):
        if self.lr <= 0:
            raise LE.ArgumentError(f'Learning rate must be positive, got {self.lr}.')
        if self.epochs < 1:
            raise LE.ArgumentError(f'Need at least one epoch, got {self.epochs}.')
        if self.mode not in MODES:
            raise LE.ArgumentError(f'Mode must be one of {MODES}, got {self.mode}.')
        if self.latent_estimator not in LATENT_ESTIMATORS:
            raise LE.ArgumentError(f'Latent estimator must be one of {LATENT_ESTIMATORS}, got {self.latent_estimator}.')
        if self.batch_size < 0 or self.eval_interval < 1 or self.checkpoint_interval < 1:
            raise LE.ArgumentError('batch_size must be >= 0 and intervals >= 1.')
        if self.fixed_permutation is not None:
            self.fixed_permutation = [int(v) for v in self.fixed_permutation]
            permutation_matrix(self.fixed_permutation)

    @property
    def learn(self) -> bool:
        return self.mode == LEARN

    def scale_for(self, d: int) -> float:
        return self.horseshoe_scale if self.horseshoe_scale is not None else pst.default_horseshoe_scale(d)

def config_hash(config: TrainConfig) -> str:
    ''' Returns: sha256 of the canonical YAML dump, epochs excluded so finished
        runs can be extended from their checkpoint. '''
    document = {k: v for k, v in asdict(config).items() if k != 'epochs'}
    return hashlib.sha256(yaml.safe_dump(document, sort_keys=True).encode('utf-8')).hexdigest()

@dataclass
class TrainState:
    params: Dict[str, Any]
    opt_state: Any
    epoch: int = 0
    trace: List[float] = field(default_factory=list)
    order: Optional[np.ndarray] = None
    seed: int = 0

    @property
    def d(self) -> int:
        return pst.nodes_from_q_length(self.params['q']['mean'].shape[0])

@dataclass
class TrainHistory:
    epochs: List[int] = field(default_factory=list)
    elbo: List[float] = field(default_factory=list)
    metrics: List[Dict] = field(default_factory=list)
    diverged: bool = False

def init_state(config: TrainConfig, d: int, D: int) -> TrainState:
    ''' Returns: Fresh state; the logit network only exists when the ordering is learned. '''
    q_key, logit_key, decoder_key = jax.random.split(jax.random.PRNGKey(config.seed), 3)
    params = {'q': pst.init_q(d, q_key), 'decoder': init_decoder(config.decoder, d, D, decoder_key)}
    order = None
    if config.learn:
        params['logits'] = pst.init_logit_mlp(d, logit_key)
    else:
        order = np.asarray(config.fixed_permutation if config.fixed_permutation is not None else range(d), dtype=int)
        if order.shape[0] != d:
            raise LE.ArgumentError(f'Fixed permutation has {order.shape[0]} entries for {d} nodes.')
    return TrainState(params, adam_init(params), 0, [], order, config.seed)

def soft_permutation(params, q_noise, gumbel, tau: float, iters: int):
    l, log_sigma = pst.sample_l_sigma(params['q'], q_noise)
    t = pst.logit_mlp(l, log_sigma, params['logits'])
    return pst.gumbel_sinkhorn(t, tau, iters, gumbel)

def elbo_value(params, x, masks, values, scale, q_noise, gumbel, latent_noise, hard, *, learn: bool,
               fixed_order: Optional[Tuple[int, ...]], tau: float, iters: int, horseshoe_scale: float,
               sigma_prior: Tuple[float, float], perm_coefficient: float, clamp: bool):
    ''' Returns: Single-sample ELBO: scaled reconstruction log-likelihood minus
        the q(L, sigma) KL estimate and the permutation surrogate. hard is the
        Hungarian permutation of the same soft sample, computed outside. '''
    draw = pst.draw_q(params['q'], q_noise)
    l, log_sigma = pst.unpack_draw(draw)
    if learn:
        t = pst.logit_mlp(l, log_sigma, params['logits'])
        soft = pst.gumbel_sinkhorn(t, tau, iters, gumbel)
        p = pst.straight_through(soft, hard)
        order = jnp.argmax(hard, axis=1)
        perm_term = pst.perm_kl_surrogate(t, hard, perm_coefficient)
    else:
        p = jnp.asarray(permutation_matrix(fixed_order))
        order = np.asarray(fixed_order, dtype=int)
        perm_term = 0.0
    w = compose_w(p, l)
    z = ancestral_sample(w, log_sigma, latent_noise, order, masks, values if clamp else None)
    decoder = params['decoder']
    reconstruction = scale * jnp.sum(log_likelihood(x, decode(z, decoder), decoder['log_obs_noise']))
    kl = pst.kl_q_lsigma(params['q'], draw, horseshoe_scale, sigma_prior)
    return reconstruction - kl - perm_term

class ElboProgram:
    ''' Purpose: The ELBO of one run with its static settings bound, plus the
        noise draws and permutation hardening that feed it. Build once per run
        so the compiled gradient program is reused across epochs. '''

    def __init__(self, config: TrainConfig, d: int, order: Optional[np.ndarray]):
        self.config, self.d = config, d
        self.loss = partial(elbo_value, learn=config.learn,
                            fixed_order=None if order is None else tuple(int(v) for v in order),
                            tau=config.sinkhorn_tau, iters=config.sinkhorn_iters,
                            horseshoe_scale=config.scale_for(d),
                            sigma_prior=(config.sigma_prior_mean, config.sigma_prior_std),
                            perm_coefficient=config.perm_kl_coefficient, clamp=config.clamp_interventions)
        self.soft = jax.jit(partial(soft_permutation, tau=config.sinkhorn_tau, iters=config.sinkhorn_iters))

    def harden(self, params, q_noise, gumbel) -> jnp.ndarray:
        soft = np.asarray(self.soft(params, q_noise, gumbel))
        if not np.isfinite(soft).all():
            raise LE.NonFiniteGradient('Soft permutation sample is not finite.')
        return jnp.asarray(pst.hungarian(soft))

    def inputs(self, params, dataset: Dataset, rng) -> Tuple:
        ''' Returns: Loss inputs for one step: a batch of rows, its likelihood
            scale and frozen noise (q draw, Gumbel, per-row latent noise). '''
        batch_key, q_key, gumbel_key, latent_key = jax.random.split(rng, 4)
        N, batch = dataset.N, self.config.batch_size
        if batch and batch < N:
            rows = np.sort(np.asarray(jax.random.choice(batch_key, N, (batch,), replace=False)))
        else:
            rows = np.arange(N)
        q_noise = jax.random.normal(q_key, params['q']['mean'].shape)
        latent_noise = jax.random.normal(latent_key, (rows.shape[0], self.d))
        if self.config.learn:
            gumbel = pst.sample_gumbel(gumbel_key, self.d)
            hard = self.harden(params, q_noise, gumbel)
        else:
            gumbel = hard = jnp.zeros((self.d, self.d))
        scale = jnp.asarray(N / rows.shape[0])
        return (jnp.asarray(dataset.x[rows]), jnp.asarray(dataset.masks[rows]), jnp.asarray(dataset.intervention_values[rows]),
                scale, q_noise, gumbel, latent_noise, hard)

def parameter_norms(params) -> Dict[str, float]:
    return {name: float(jnp.linalg.norm(jnp.ravel(leaf))) for name, leaf in leaf_names(params)}

def elbo_step(state: TrainState, dataset: Dataset, rng, program: ElboProgram) -> Tuple[float, Dict]:
    ''' Returns: (ELBO estimate, GradStore) for all parameters jointly.
        Exception: Divergence when the estimate is not finite. '''
    value, grads = grad(program.loss, state.params, *program.inputs(state.params, dataset, rng))
    value = float(value)
    if not np.isfinite(value):
        Log.alert(f'Non-finite ELBO at epoch {state.epoch}, parameter norms:')
        Log.dump(parameter_norms(state.params))
        raise LE.Divergence(f'ELBO is {value} at epoch {state.epoch}.')
    return value, grads

def train(config: TrainConfig, dataset: Dataset, state: Optional[TrainState] = None, epochs: Optional[int] = None,
          evaluate: Optional[Callable[[TrainState], Dict]] = None,
          on_checkpoint: Optional[Callable[[TrainState], None]] = None,
          progress: bool = True, float_checks: bool = True) -> Tuple[TrainState, TrainHistory]:
    ''' Returns: (final state, history). Runs until state.epoch reaches epochs
        (config.epochs by default), evaluating every eval_interval epochs when an
        evaluate callback is given. Epoch noise is keyed by (seed, epoch), so a
        resumed state continues the uninterrupted trace. A non-finite ELBO or
        repeated non-finite gradients stop training early. float_checks also
        rejects steps that leave a parameter non-finite. '''
    if state is None:
        state = init_state(config, dataset.d, dataset.D)
    target = config.epochs if epochs is None else epochs
    history = TrainHistory()
    if target <= state.epoch:
        return state, history
    program = ElboProgram(config, dataset.d, state.order)
    master = jax.random.PRNGKey(state.seed)
    bar = tqdm(range(state.epoch, target), desc='Training', unit='epoch', disable=not progress, leave=False)
    for epoch in bar:
        epoch_key = jax.random.fold_in(master, epoch)
        attempts = itertools.count()

        def step():
            value, grads = elbo_step(state, dataset, jax.random.fold_in(epoch_key, next(attempts)), program)
            params, opt_state = adam_step(state.params, grads, state.opt_state, config.lr)
            if float_checks:
                assert_finite(params, 'parameter')
            return value, params, opt_state

        try:
            value, params, opt_state = LE.handle_bad_step(step, retries=config.bad_step_retries)
        except LE.Divergence as e:
            Log.alert(f'Training diverged, stopping early: {e}')
            history.diverged = True
            break
        state.params, state.opt_state, state.epoch = params, opt_state, epoch + 1
        state.trace.append(value)
        history.epochs.append(state.epoch)
        history.elbo.append(value)
        bar.set_postfix(elbo=f'{value:.4g}')
        if evaluate is not None and (state.epoch % config.eval_interval == 0 or state.epoch == target):
            record = {'epoch': state.epoch, 'elbo': value, **evaluate(state)}
            history.metrics.append(record)
        if on_checkpoint is not None and (state.epoch % config.checkpoint_interval == 0 or state.epoch == target):
            on_checkpoint(state)
    bar.close()
    return state, history

def mean_permutation(state: TrainState, config: TrainConfig) -> np.ndarray:
    ''' Returns: Fixed P, or the Hungarian hardening of the noise-free Sinkhorn
        output at the q mean. '''
    if state.order is not None:
        return permutation_matrix(state.order)
    l, log_sigma = pst.sample_l_sigma(state.params['q'], jnp.zeros_like(state.params['q']['mean']))
    t = pst.logit_mlp(l, log_sigma, state.params['logits'])
    return pst.hungarian(pst.gumbel_sinkhorn(t, config.sinkhorn_tau, config.sinkhorn_iters))

def posterior_mean_scm(state: TrainState, config: TrainConfig) -> LatentScm:
    l, log_sigma = pst.sample_l_sigma(state.params['q'], jnp.zeros_like(state.params['q']['mean']))
    order = np.argmax(mean_permutation(state, config), axis=1)
    return LatentScm(order, np.asarray(l), float(log_sigma))

def learned_graph(state: TrainState, config: TrainConfig) -> Dict[str, Any]:
    ''' Returns: binary(W), (W, sigma) of the posterior mean SCM. '''
    scm = posterior_mean_scm(state, config)
    return {'binary_w': binarize(scm.w, config.threshold), 'w': scm.w, 'sigma': float(np.exp(scm.log_sigma)), 'order': scm.order}

def sample_posterior(state: TrainState, config: TrainConfig, n: int, rng) -> Tuple[np.ndarray, np.ndarray]:
    ''' Returns: (W samples (n, d, d), log sigma samples (n,)), each a fresh
        draw of (L, sigma), Gumbel noise and hardened permutation. '''
    d = state.d
    ws, log_sigmas = [], []
    for key in jax.random.split(rng, n):
        q_key, gumbel_key = jax.random.split(key)
        q_noise = jax.random.normal(q_key, state.params['q']['mean'].shape)
        l, log_sigma = pst.sample_l_sigma(state.params['q'], q_noise)
        if state.order is not None:
            p = permutation_matrix(state.order)
        else:
            t = pst.logit_mlp(l, log_sigma, state.params['logits'])
            p = pst.hungarian(pst.gumbel_sinkhorn(t, config.sinkhorn_tau, config.sinkhorn_iters, pst.sample_gumbel(gumbel_key, d)))
        ws.append(np.asarray(compose_w(p, l)))
        log_sigmas.append(float(log_sigma))
    return np.stack(ws), np.asarray(log_sigmas)

def gaussian_posterior_latents(scm: LatentScm, decoder: Dict, masks: np.ndarray, values: Optional[np.ndarray],
                               x: np.ndarray) -> np.ndarray:
    ''' Returns: Exact E[z | x, mask] under a linear decoder. Per distinct mask
        z = e (I - W_m)^-1 with e Gaussian (clamped coordinates fixed when
        values are given), so the posterior mean is the Gaussian conditional. '''
    d = scm.d
    w_dec = np.asarray(decoder['layers'][0]['w'])
    bias = np.asarray(decoder['layers'][0]['b'])
    obs_var = float(np.exp(2.0 * decoder['log_obs_noise']))
    sigma2 = float(np.exp(2.0 * scm.log_sigma))
    out = np.empty((masks.shape[0], d))
    for mask in np.unique(masks, axis=0):
        rows = np.all(masks == mask, axis=1)
        mix = np.linalg.inv(np.eye(d) - scm.w * (1.0 - mask)[None, :])
        free = (1.0 - mask) if values is not None else np.ones(d)
        mu_e = values[rows] * mask if values is not None else np.zeros((int(rows.sum()), d))
        mu_z = mu_e @ mix
        cov_z = mix.T @ (sigma2 * np.diag(free)) @ mix
        cov_x = w_dec.T @ cov_z @ w_dec + obs_var * np.eye(w_dec.shape[1])
        gain = np.linalg.solve(cov_x, w_dec.T @ cov_z)
        out[rows] = mu_z + (x[rows] - mu_z @ w_dec - bias) @ gain
    return out

def weighted_latents(samples: np.ndarray, decoder: Dict, x: np.ndarray, chunk: int = 256) -> np.ndarray:
    ''' Returns: Self-normalised importance estimate of E[z | x] from ancestral
        samples (k, N, d), weighted by the decoder likelihood of each row. '''
    out = np.empty(samples.shape[1:])
    for start in range(0, samples.shape[1], chunk):
        block = samples[:, start:start + chunk]
        mean = decode(block, decoder)
        observed = jnp.broadcast_to(jnp.asarray(x[start:start + chunk]), mean.shape)
        log_w = np.asarray(log_likelihood(observed, mean, decoder['log_obs_noise']))
        weights = np.exp(log_w - log_w.max(axis=0, keepdims=True))
        weights /= weights.sum(axis=0, keepdims=True)
        out[start:start + chunk] = np.einsum('kn,knd->nd', weights, block)
    return out

def sample_latents(state: TrainState, config: TrainConfig, masks: np.ndarray, values: Optional[np.ndarray], k: int, rng,
                   x: Optional[np.ndarray] = None) -> np.ndarray:
    ''' Returns: Per-row latent estimates from the posterior mean SCM under
        each row's mask, values clamping intervened nodes only when the run
        clamps. The prior estimator averages k ancestral samples. The posterior
        estimator conditions on x: exactly for a linear decoder, otherwise by
        likelihood-weighting the same k samples. '''
    scm = posterior_mean_scm(state, config)
    masks = np.asarray(masks, dtype=float)
    clamp = values if config.clamp_interventions and values is not None else None
    use_x = x is not None and config.latent_estimator == 'posterior'
    if use_x and len(state.params['decoder']['layers']) == 1:
        return gaussian_posterior_latents(scm, state.params['decoder'], masks, clamp, np.asarray(x))
    noise = np.asarray(jax.random.normal(rng, (k, *masks.shape)))
    samples = scm.sample(noise, masks, clamp)
    if use_x:
        return weighted_latents(samples, state.params['decoder'], np.asarray(x))
    return samples.mean(axis=0)

def sample_interventional_images(state: TrainState, config: TrainConfig, mask: np.ndarray, n: int, rng,
                                 values: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    ''' Returns: (n decoded observations, their mean) from the learned SCM
        mutated by mask. values (n, d) are used only when the run clamps. '''
    scm = posterior_mean_scm(state, config)
    masks = np.tile(np.asarray(mask, dtype=float), (n, 1))
    noise = np.asarray(jax.random.normal(rng, masks.shape))
    clamp = values * masks if config.clamp_interventions and values is not None else None
    decoded = np.asarray(decode(scm.sample(noise, masks, clamp), state.params['decoder']))
    return decoded, decoded.mean(axis=0)

def clamp_to_ground_truth(state: TrainState, gt: GroundTruth) -> TrainState:
    ''' Returns: Copy of state whose posterior is a point mass at the ground
        truth (P, L, sigma) and whose decoder reproduces the projection when a
        decoder family can express it. '''
    d = gt.d
    params = dict(state.params)
    mean = jnp.concatenate([pst.free_entries(gt.scm.l), jnp.asarray([gt.scm.log_sigma], dtype=float)])
    params['q'] = {'mean': mean, 'log_std': jnp.full(mean.shape, ORACLE_LOG_STD)}
    order = state.order
    if 'logits' in params:
        logits = [dict(layer) for layer in params['logits']]
        logits[-1]['w'] = jnp.zeros_like(logits[-1]['w'])
        logits[-1]['b'] = jnp.asarray(SATURATED_LOGIT * (2.0 * gt.scm.p - 1.0)).reshape(d * d)
        params['logits'] = logits
    else:
        order = np.asarray(gt.scm.order)
    decoder = decoder_from_projection(gt.projection.kind, gt.projection.params, ORACLE_LOG_OBS_NOISE)
    if decoder is not None:
        params['decoder'] = decoder
    else:
        Log.warn(f'No decoder reproduces the {gt.projection.kind} projection, keeping the current decoder.')
    return TrainState(params, adam_init(params), state.epoch, list(state.trace), order, state.seed)
