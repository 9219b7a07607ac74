''' Created: 05/10/2026 '''

# Differentiation and optimisation substrate. A ParamStore is any pytree of
# float arrays (nested dicts and lists), GradStores share its structure.

# External Dependencies
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional, Tuple
import numpy as np
import jax
import jax.numpy as jnp
from jax.flatten_util import ravel_pytree
import optax

# Internal Dependencies
from utilities.custom_exceptions import LatentExceptions as LE

ParamStore = Any
BETA_1, BETA_2, EPSILON = 0.9, 0.999, 1e-8

@lru_cache(maxsize=16)
def compiled_value_and_grad(loss: Callable) -> Callable:
    return jax.jit(jax.value_and_grad(loss))

def grad(loss: Callable, params: ParamStore, *inputs) -> Tuple[float, ParamStore]:
    ''' Returns: (loss value, GradStore) by reverse mode over params only.
        inputs are treated as constants. Compiled programs are cached per loss
        function, so build the loss once per run rather than per call. '''
    try:
        value, grads = compiled_value_and_grad(loss)(params, *inputs)
    except TypeError as e:
        raise LE.UnsupportedPrimitive(f'{getattr(loss, "__name__", "loss")} could not be differentiated: {e}')
    return value, grads

def stop_gradient(x):
    return jax.lax.stop_gradient(x)

def leaf_names(tree: ParamStore):
    paths, _ = jax.tree_util.tree_flatten_with_path(tree)
    return [(jax.tree_util.keystr(path), leaf) for path, leaf in paths]

def assert_finite(tree: ParamStore, what: str = 'gradient') -> None:
    bad = [name for name, leaf in leaf_names(tree) if not bool(jnp.all(jnp.isfinite(leaf)))]
    if bad:
        raise LE.NonFiniteGradient(f'Non-finite {what} in {", ".join(bad)}.')

def adam_init(params: ParamStore):
    return optax.scale_by_adam(BETA_1, BETA_2, EPSILON).init(params)

def adam_step(params: ParamStore, grads: ParamStore, state, lr: float, maximize: bool = True):
    ''' Returns: (params, state) after one Adam update. maximize ascends the
        objective (the ELBO); the step is rejected if any gradient is not finite. '''
    if lr <= 0:
        raise LE.ArgumentError(f'Learning rate must be positive, got {lr}.')
    if jax.tree_util.tree_structure(params) != jax.tree_util.tree_structure(grads):
        raise LE.ArgumentError('Gradient store does not match parameter store.')
    assert_finite(grads)
    updates, state = optax.scale_by_adam(BETA_1, BETA_2, EPSILON).update(grads, state, params)
    sign = 1.0 if maximize else -1.0
    params = jax.tree_util.tree_map(lambda p, u: p + sign * lr * u, params, updates)
    return params, state

@dataclass
class GradientReport:
    max_rel_error: float
    worst: str
    checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_rel_error <= self.tolerance)

def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-6)

def check_gradients(loss: Callable, params: ParamStore, *inputs, step: float = 1e-4, tolerance: float = 1e-3,
                    grads: Optional[ParamStore] = None, max_coordinates: int = 400, n_directions: int = 64,
                    seed: int = 0) -> GradientReport:
    ''' Returns: Worst relative error between reverse-mode gradients (or the
        given grads) and central finite differences. Stores with more than
        max_coordinates entries are checked along n_directions random unit directions.
        loss must be deterministic in params. '''
    flat, unravel = ravel_pytree(params)
    if grads is None:
        _, grads = grad(loss, params, *inputs)
    flat_grads = np.asarray(ravel_pytree(grads)[0], dtype=float)
    objective = lambda v: float(loss(unravel(v), *inputs))
    if flat.size <= max_coordinates:
        directions = np.eye(flat.size)
        labels = [f'coordinate {i}' for i in range(flat.size)]
    else:
        rng = np.random.default_rng(seed)
        directions = rng.normal(size=(n_directions, flat.size))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        labels = [f'direction {i}' for i in range(n_directions)]
    worst_error, worst_label = 0.0, 'none'
    for direction, label in zip(directions, labels):
        offset = jnp.asarray(step * direction, dtype=flat.dtype)
        numeric = (objective(flat + offset) - objective(flat - offset)) / (2.0 * step)
        error = relative_error(float(flat_grads @ direction), numeric)
        if error > worst_error:
            worst_error, worst_label = error, label
    return GradientReport(worst_error, worst_label, len(labels), tolerance)
