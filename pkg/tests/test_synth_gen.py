''' Created: 11/10/2026 '''

# External Dependencies
import os
import numpy as np
import pytest
import yaml

# Internal Dependencies
from core.scm_core import compose_w, is_dag
from core.synth_gen import (load_dataset, make_ground_truth, make_projection, project, sample_er_dag,
                            sample_intervention_plan, sample_parameters, save_dataset, generate_dataset)
from utilities.custom_exceptions import LatentExceptions as LE

def test_two_node_degree_one_always_has_the_edge():
    for seed in range(20):
        adjacency, _ = sample_er_dag(2, 1, seed)
        assert adjacency.sum() == 1

def test_expected_edge_count():
    counts = [sample_er_dag(5, 1, seed)[0].sum() for seed in range(2000)]
    assert np.mean(counts) == pytest.approx(5.0, abs=0.2)

def test_er_dags_are_acyclic_for_all_degrees():
    for degree in (1, 2, 4):
        for seed in range(10):
            assert is_dag(sample_er_dag(8, degree, seed)[0])

def test_er_dag_rejects_single_node_and_bad_degree():
    with pytest.raises(LE.ArgumentError):
        sample_er_dag(1, 1, 0)
    with pytest.raises(LE.ArgumentError):
        sample_er_dag(5, 3, 0)

def test_parameters_of_empty_support_are_zero():
    np.testing.assert_array_equal(sample_parameters(np.zeros((4, 4)), 0), np.zeros((4, 4)))

def test_weight_magnitudes_are_uniform_half_to_two():
    support = np.tril(np.ones((150, 150)), k=-1)
    weights = np.abs(sample_parameters(support, 0)[support == 1])
    assert weights.min() >= 0.5 and weights.max() <= 2.0
    assert weights.mean() == pytest.approx(1.25, abs=0.02)

def test_parameters_follow_node_space_support():
    adjacency, p = sample_er_dag(6, 2, 4)
    l = sample_parameters(adjacency, 5, p)
    np.testing.assert_array_equal(np.abs(np.asarray(compose_w(p, l))) > 0, adjacency == 1)

def test_parameters_reject_support_outside_ordering():
    with pytest.raises(LE.ArgumentError):
        sample_parameters(np.array([[0, 1], [0, 0]]), 0)

def test_plan_for_five_nodes_gives_two_thousand_rows():
    plan = sample_intervention_plan(5, 20, 100, False, 0)
    assert sum(count for _, count in plan) == 2000
    assert len({tuple(mask) for mask, _ in plan}) == 20
    assert all(mask.any() for mask, _ in plan)

def test_single_node_plan():
    plan = sample_intervention_plan(5, 5, 10, True, 0)
    assert all(mask.sum() == 1 for mask, _ in plan)

def test_plan_rejects_too_many_sets_and_honours_exclusions():
    with pytest.raises(LE.ArgumentError):
        sample_intervention_plan(3, 8, 1, False, 0)
    first = sample_intervention_plan(3, 4, 1, False, 0)
    second = sample_intervention_plan(3, 3, 1, False, 1, exclude=[m for m, _ in first])
    assert not {tuple(m) for m, _ in first} & {tuple(m) for m, _ in second}
    with pytest.raises(LE.ArgumentError):
        sample_intervention_plan(3, 4, 1, False, 1, exclude=[m for m, _ in first])

def test_large_plans_use_rejection_sampling():
    plan = sample_intervention_plan(20, 100, 2, False, 0)
    assert len({tuple(mask) for mask, _ in plan}) == 100

def test_dataset_layout():
    gt = make_ground_truth(5, 100, 1, 'linear', 0)
    dataset = generate_dataset(gt, 500, sample_intervention_plan(5, 20, 100, False, 1), 2)
    assert dataset.N == 2500 and dataset.D == 100
    assert not dataset.masks[:500].any()
    assert dataset.masks[500:].any(axis=1).all()
    np.testing.assert_array_equal(dataset.intervention_values[dataset.masks == 0], 0.0)

def test_all_ones_rows_equal_intervention_values(chain_gt):
    dataset = generate_dataset(chain_gt, 0, [(np.ones(3, dtype=int), 50)], 0)
    np.testing.assert_array_equal(dataset.z_true, dataset.intervention_values)

def test_observational_rows_match_closed_form_covariance(chain_gt):
    dataset = generate_dataset(chain_gt, 10_000, [], 0)
    assert np.max(np.abs(np.cov(dataset.z_true.T) - chain_gt.scm.covariance())) < 0.15

def test_linear_observations_lie_in_projection_row_space():
    gt = make_ground_truth(4, 30, 2, 'linear', 3)
    dataset = generate_dataset(gt, 50, sample_intervention_plan(4, 3, 10, False, 4), 5)
    matrix = gt.projection.params['matrix']
    z_hat = np.linalg.lstsq(matrix.T, dataset.x.T, rcond=None)[0].T
    assert np.max(np.abs(z_hat @ matrix - dataset.x)) < 1e-8

def test_linear_projection_is_linear(chain_gt):
    rng = np.random.default_rng(0)
    z1, z2 = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    np.testing.assert_allclose(project(z1 + z2, chain_gt.projection),
                               project(z1, chain_gt.projection) + project(z2, chain_gt.projection))
    np.testing.assert_array_equal(project(np.zeros((1, 3)), chain_gt.projection), 0.0)

def test_block_images():
    spec = make_projection('blocks', 3, 1024, 0)
    z = np.array([[1e3, 0.0, -1.0], [1e3, 2.0, -1.0]])
    images = project(z, spec).reshape(2, 32, 32)
    assert images.min() >= 0.0 and images.max() <= 1.0
    top, bottom, left, right = spec.params['boxes'][0]
    assert np.all(images[0, top:bottom, left:right] == 1.0)
    top, bottom, left, right = spec.params['boxes'][2]
    np.testing.assert_array_equal(images[0, top:bottom, left:right], images[1, top:bottom, left:right])

def test_projection_dimension_checks():
    with pytest.raises(LE.ArgumentError):
        make_projection('blocks', 3, 100, 0)
    with pytest.raises(LE.ArgumentError):
        make_projection('linear', 10, 5, 0)

def test_mlp3_projection_shape():
    spec = make_projection('mlp3', 4, 20, 0)
    assert project(np.zeros((7, 4)), spec).shape == (7, 20)

def test_same_seed_same_dataset():
    first = generate_dataset(make_ground_truth(4, 10, 1, 'mlp3', 7), 20, sample_intervention_plan(4, 2, 5, False, 7), 7)
    second = generate_dataset(make_ground_truth(4, 10, 1, 'mlp3', 7), 20, sample_intervention_plan(4, 2, 5, False, 7), 7)
    np.testing.assert_array_equal(first.x, second.x)

def test_spawned_seed_sequences_are_accepted():
    from_int = make_ground_truth(4, 10, 1, 'mlp3', 7)
    from_sequence = make_ground_truth(4, 10, 1, 'mlp3', np.random.SeedSequence(7))
    np.testing.assert_array_equal(from_int.scm.l, from_sequence.scm.l)
    np.testing.assert_array_equal(from_int.scm.order, from_sequence.scm.order)
    for key in from_int.projection.params:
        np.testing.assert_array_equal(from_int.projection.params[key], from_sequence.projection.params[key])
    child = np.random.SeedSequence(7).spawn(1)[0]
    gt = make_ground_truth(4, 10, 1, 'linear', child)
    assert gt.scm.l.shape == (4, 4)
    data = generate_dataset(gt, 20, sample_intervention_plan(4, 2, 5, False, child.spawn(1)[0]), child.spawn(1)[0])
    assert data.x.shape == (30, 10)

def test_container_round_trip_is_bit_exact(tmp_path, small_gt, small_dataset):
    save_dataset(str(tmp_path / 'data'), small_dataset, small_gt, {'seed': 0})
    dataset, gt, metadata = load_dataset(str(tmp_path / 'data'))
    for name in ('x', 'masks', 'intervention_values', 'z_true', 'plan_masks'):
        np.testing.assert_array_equal(getattr(dataset, name), getattr(small_dataset, name))
    np.testing.assert_array_equal(gt.scm.l, small_gt.scm.l)
    np.testing.assert_array_equal(gt.projection.params['matrix'], small_gt.projection.params['matrix'])
    assert gt.scm.log_sigma == small_gt.scm.log_sigma
    assert metadata['seed'] == 0 and metadata['d'] == 3

def test_container_without_ground_truth(tmp_path, small_dataset):
    save_dataset(str(tmp_path / 'data'), small_dataset, None, {'projection': 'linear'})
    _, gt, _ = load_dataset(str(tmp_path / 'data'))
    assert gt is None

def test_reader_rejects_dimension_disagreement(tmp_path, small_gt, small_dataset):
    directory = str(tmp_path / 'data')
    save_dataset(directory, small_dataset, small_gt)
    path = os.path.join(directory, 'metadata.yml')
    with open(path) as file:
        metadata = yaml.safe_load(file)
    metadata['D'] = 9
    with open(path, 'w') as file:
        yaml.safe_dump(metadata, file)
    with pytest.raises(LE.DatasetFormatError):
        load_dataset(directory)
