''' Created: 12/10/2026 '''

# External Dependencies
import itertools
import math
import numpy as np
import jax
import jax.numpy as jnp
import pytest
from hypothesis import given, settings, strategies as st

# Internal Dependencies
from core.posterior import (draw_q, gumbel_sinkhorn, hungarian, init_logit_mlp, init_q, kl_q_lsigma, log_prior_l,
                            logit_mlp, nodes_from_q_length, perm_kl_surrogate, q_length, sample_gumbel,
                            straight_through, unpack_draw)
from core.scm_core import is_permutation, permutation_matrix
from utilities.custom_exceptions import LatentExceptions as LE

def standard_normal_log_density(entries):
    return jnp.sum(-0.5 * entries ** 2 - 0.5 * math.log(2.0 * math.pi))

def test_q_length_round_trip():
    for d in range(2, 12):
        assert nodes_from_q_length(q_length(d)) == d
    with pytest.raises(LE.ArgumentError):
        nodes_from_q_length(5)

def test_draw_fills_lower_entries_row_major():
    l, log_sigma = unpack_draw(jnp.array([1.0, 2.0, 3.0, -0.5]))
    np.testing.assert_array_equal(l, [[0, 0, 0], [1, 0, 0], [2, 3, 0]])
    assert float(log_sigma) == -0.5

def test_draw_checks_noise_shape():
    q = init_q(3, jax.random.PRNGKey(0))
    with pytest.raises(LE.ArgumentError):
        draw_q(q, jnp.zeros(3))

def test_hungarian_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(5):
        scores = rng.normal(size=(6, 6))
        best = max(itertools.permutations(range(6)), key=lambda perm: sum(scores[i, perm[i]] for i in range(6)))
        np.testing.assert_array_equal(hungarian(scores), permutation_matrix(best))

def test_hungarian_rejects_non_finite():
    with pytest.raises(LE.ArgumentError):
        hungarian(np.array([[np.nan, 0.0], [0.0, 1.0]]))

@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=1000))
def test_sinkhorn_is_doubly_stochastic(d, seed):
    key = jax.random.PRNGKey(seed)
    soft = np.asarray(gumbel_sinkhorn(jax.random.normal(key, (d, d)), 1.0, 50, sample_gumbel(key, d)))
    assert np.all(soft >= 0)
    np.testing.assert_allclose(soft.sum(axis=0), 1.0, atol=1e-6)
    np.testing.assert_allclose(soft.sum(axis=1), 1.0, atol=1e-2)
    assert is_permutation(hungarian(soft))

def test_sinkhorn_saturates_at_low_temperature():
    target = permutation_matrix([2, 0, 3, 1])
    soft = np.asarray(gumbel_sinkhorn(5.0 * target, tau=0.05, iters=20))
    np.testing.assert_allclose(soft, target, atol=1e-6)

def test_sinkhorn_argument_checks():
    with pytest.raises(LE.ArgumentError):
        gumbel_sinkhorn(jnp.zeros((2, 2)), tau=0.0)
    with pytest.raises(LE.ArgumentError):
        gumbel_sinkhorn(jnp.zeros((2, 2)), iters=0)

def test_straight_through_forward_is_hard_and_gradient_is_soft():
    t = jax.random.normal(jax.random.PRNGKey(1), (4, 4))
    weights = jax.random.normal(jax.random.PRNGKey(2), (4, 4))
    hard = jnp.asarray(hungarian(gumbel_sinkhorn(t)))
    np.testing.assert_allclose(straight_through(gumbel_sinkhorn(t), hard), hard, atol=1e-12)
    through = jax.grad(lambda t: jnp.sum(weights * straight_through(gumbel_sinkhorn(t), hard)))(t)
    soft = jax.grad(lambda t: jnp.sum(weights * gumbel_sinkhorn(t)))(t)
    np.testing.assert_allclose(through, soft, rtol=1e-10, atol=1e-12)

def test_straight_through_shape_check():
    with pytest.raises(LE.ArgumentError):
        straight_through(jnp.eye(2), jnp.eye(3))

def test_logit_network_output_shape():
    weights = init_logit_mlp(4, jax.random.PRNGKey(0))
    l, log_sigma = unpack_draw(jnp.arange(q_length(4), dtype=float) / 10)
    assert logit_mlp(l, log_sigma, weights).shape == (4, 4)

def test_horseshoe_is_finite_at_zero_and_decreasing():
    values = [float(log_prior_l(jnp.array([v]), 0.5)) for v in (0.0, 0.1, 0.5, 1.0, 3.0)]
    assert all(np.isfinite(values))
    assert values == sorted(values, reverse=True)
    with pytest.raises(LE.ArgumentError):
        log_prior_l(jnp.array([1.0]), 0.0)

def test_horseshoe_matches_closed_form():
    scale, value = 0.4, 0.7
    expected = math.log(math.log1p(2 * scale ** 2 / value ** 2)) - 0.5 * math.log(2 * math.pi ** 3) - math.log(scale)
    assert float(log_prior_l(jnp.array([value, -value]), scale)) == pytest.approx(2 * expected)

def test_kl_vanishes_when_q_equals_prior():
    q = {'mean': jnp.zeros(q_length(3)), 'log_std': jnp.zeros(q_length(3))}
    for seed in range(5):
        draw = draw_q(q, jax.random.normal(jax.random.PRNGKey(seed), (q_length(3),)))
        kl = kl_q_lsigma(q, draw, 1.0, (0.0, 1.0), standard_normal_log_density)
        assert abs(float(kl)) < 1e-10

def test_kl_estimate_is_unbiased_under_gaussian_prior():
    n = q_length(3)
    q = {'mean': jnp.full((n,), 0.5), 'log_std': jnp.full((n,), math.log(0.5))}
    noise = jax.random.normal(jax.random.PRNGKey(0), (20_000, n))
    estimate = jax.vmap(lambda e: kl_q_lsigma(q, draw_q(q, e), 1.0, (0.0, 1.0), standard_normal_log_density))(noise)
    per_coordinate = math.log(2.0) + (0.25 + 0.25) / 2 - 0.5
    assert float(jnp.mean(estimate)) == pytest.approx(n * per_coordinate, abs=0.05)

def test_permutation_kl_surrogate_value():
    value = perm_kl_surrogate(jnp.zeros((3, 3)), jnp.eye(3), 2.0)
    assert float(value) == pytest.approx(2.0 * (math.log(6.0) - 3.0 * math.log(3.0)))

def test_twenty_sinkhorn_iterations_are_doubly_stochastic():
    t = jax.random.normal(jax.random.PRNGKey(5), (6, 6))
    soft = np.asarray(gumbel_sinkhorn(t, 1.0, 20))
    np.testing.assert_allclose(soft.sum(axis=0), 1.0, atol=1e-3)
    np.testing.assert_allclose(soft.sum(axis=1), 1.0, atol=1e-3)

def test_saturated_logits_harden_to_their_assignment():
    rng = np.random.default_rng(2)
    scores = 20.0 * permutation_matrix(rng.permutation(6)) + 0.1 * rng.normal(size=(6, 6))
    best = max(itertools.permutations(range(6)), key=lambda perm: sum(scores[i, perm[i]] for i in range(6)))
    soft = gumbel_sinkhorn(jnp.asarray(scores), tau=1.0, iters=20)
    np.testing.assert_array_equal(hungarian(soft), permutation_matrix(best))
