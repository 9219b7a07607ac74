''' Created: 06/10/2026 '''

# External Dependencies
from typing import Dict, List, Optional
import math
import numpy as np
import jax
import jax.numpy as jnp

# Internal Dependencies
from utilities.custom_exceptions import LatentExceptions as LE

DECODER_KINDS = ('linear', 'mlp3')
HIDDEN_WIDTH = 128

def layer_sizes(kind: str, d: int, D: int) -> List[int]:
    if kind == 'linear':
        return [d, D]
    if kind == 'mlp3':
        return [d, HIDDEN_WIDTH, HIDDEN_WIDTH, D]
    raise LE.ArgumentError(f'Unknown decoder kind {kind}, expected one of {DECODER_KINDS}.')

def init_decoder(kind: str, d: int, D: int, key) -> Dict:
    ''' Returns: Decoder params, weights N(0, 1/fan_in), zero biases and
        log_obs_noise = 0. The kind is implied by the layer count. '''
    sizes = layer_sizes(kind, d, D)
    keys = jax.random.split(key, len(sizes) - 1)
    layers = [{'w': jax.random.normal(k, (a, b)) / math.sqrt(a), 'b': jnp.zeros((b,))}
              for k, a, b in zip(keys, sizes[:-1], sizes[1:])]
    return {'layers': layers, 'log_obs_noise': jnp.zeros(())}

def decoder_kind(params: Dict) -> str:
    return 'linear' if len(params['layers']) == 1 else 'mlp3'

def decoder_from_projection(kind: str, projection_params: Dict[str, np.ndarray], log_obs_noise: float = 0.0) -> Optional[Dict]:
    ''' Returns: Decoder params reproducing a generating projection exactly, or
        None for projections no decoder family can express. '''
    if kind == 'linear':
        matrix = jnp.asarray(projection_params['matrix'])
        layers = [{'w': matrix, 'b': jnp.zeros((matrix.shape[1],))}]
    elif kind == 'mlp3':
        layers = [{'w': jnp.asarray(projection_params[f'w{k}']), 'b': jnp.asarray(projection_params[f'b{k}'])} for k in range(3)]
    else:
        return None
    return {'layers': layers, 'log_obs_noise': jnp.asarray(log_obs_noise, dtype=float)}

def decode(z, params: Dict) -> jnp.ndarray:
    ''' Returns: Mean observations of shape (..., D); tanh between layers only. '''
    layers = params['layers']
    h = jnp.asarray(z)
    if h.shape[-1] != layers[0]['w'].shape[0]:
        raise LE.ArgumentError(f'Decoder expects {layers[0]["w"].shape[0]} latents, got shape {h.shape}.')
    for layer in layers[:-1]:
        h = jnp.tanh(h @ layer['w'] + layer['b'])
    return h @ layers[-1]['w'] + layers[-1]['b']

def log_likelihood(x, mean, log_obs_noise) -> jnp.ndarray:
    ''' Returns: Isotropic Gaussian log-density summed over the last axis. '''
    x, mean = jnp.asarray(x), jnp.asarray(mean)
    if x.shape != mean.shape:
        raise LE.ArgumentError(f'Observation {x.shape} and decoded mean {mean.shape} disagree.')
    residual = (x - mean) * jnp.exp(-log_obs_noise)
    return jnp.sum(-0.5 * residual ** 2 - log_obs_noise - 0.5 * math.log(2.0 * math.pi), axis=-1)
