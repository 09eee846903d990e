import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from dataset_io import GeneratorSpec, generate
from hca_dbscan import (HcaDbscan, MergePolicy, TraversalOrder, TraversalStats, cluster, filter_small_clusters,
                        merge_condition, traverse)
from hca_errors import ConfigMismatch, EmptyInput
from hca_types import NOISE, CellRecord, ClusterLabeling, Dataset, GridConfig, NeighborOffset
from hypercube_grid import build_grid, candidate_neighbors
from oracle_dbscan import connectivity_components, rand_index, refinement_check


# --- merge_condition ---

@pytest.mark.parametrize("policy", list(MergePolicy))
def test_adjacent_single_points_within_half_epsilon_merge(policy):
    epsilon = math.sqrt(2)
    config = GridConfig.for_epsilon(epsilon, 2, np.zeros(2))
    a_point = np.array([[0.9, 0.5]])
    b_point = np.array([[1.5, 0.5]])
    a = CellRecord((0, 0), members=[0], points=a_point, shifted=a_point)
    b = CellRecord((1, 0), members=[1], points=b_point, shifted=b_point)
    assert merge_condition(a, b, NeighborOffset((1, 0), 1), epsilon, policy, config)


def test_exact_merge_matches_brute_force_any_pair(rng):
    epsilon = 1.0
    side = epsilon / math.sqrt(2)
    config = GridConfig.for_epsilon(epsilon, 2, np.zeros(2))
    for _ in range(100):
        delta = (int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))
        if delta == (0, 0):
            continue
        a_points = rng.uniform(0, side * 0.999, size=(int(rng.integers(1, 6)), 2)) + side * 3
        b_points = rng.uniform(0, side * 0.999, size=(int(rng.integers(1, 6)), 2)) + side * (3 + np.array(delta))
        a = CellRecord((3, 3), members=list(range(len(a_points))), points=a_points, shifted=a_points)
        b = CellRecord(tuple(3 + v for v in delta), members=list(range(10, 10 + len(b_points))),
                       points=b_points, shifted=b_points)
        expected = bool((cdist(a_points, b_points) < epsilon).any())
        assert merge_condition(a, b, delta, epsilon, MergePolicy.EXACT, config) == expected


def test_representative_merge_implies_a_real_close_pair(rng):
    dataset = Dataset(rng.uniform(0, 4, size=(400, 2)))
    epsilon = 0.5
    grid = build_grid(dataset, epsilon)
    for key, cell in grid.cells.items():
        for offset, other_key in candidate_neighbors(grid, key):
            other = grid.cells[other_key]
            if merge_condition(cell, other, offset, epsilon, MergePolicy.REPRESENTATIVE, grid.config):
                assert merge_condition(cell, other, offset, epsilon, MergePolicy.EXACT, grid.config)


# --- cluster ---

def test_points_in_one_cell_form_cluster_one():
    grid = build_grid(Dataset(np.array([[0.0, 0.0], [0.1, 0.1], [0.2, 0.0]])), 1.0)
    labeling = cluster(grid, 1.0)
    assert labeling.labels.tolist() == [1, 1, 1]
    assert labeling.cluster_count == 1


@pytest.mark.parametrize("policy", list(MergePolicy))
def test_blobs_far_apart_are_separate_clusters(policy, rng):
    left = rng.normal(0, 0.05, size=(100, 2))
    right = rng.normal(0, 0.05, size=(100, 2)) + [5.0, 0.0]
    dataset = Dataset(np.vstack([left, right]))
    labeling = HcaDbscan(0.5, policy=policy).fit(dataset).labeling_
    assert labeling.cluster_count == 2
    assert len(set(labeling.labels[:100])) == 1
    assert len(set(labeling.labels[100:])) == 1
    assert labeling.labels[0] != labeling.labels[100]


def test_cluster_ids_follow_lexicographic_seed_order():
    coords = np.array([[10.0, 10.0], [0.0, 0.0], [10.0, 0.0]])
    labeling = HcaDbscan(1.0).fit(Dataset(coords)).labeling_
    # seeds: (0,0) -> point 1, then (10,0) -> point 2, then (10,10) -> point 0
    assert labeling.labels.tolist() == [3, 1, 2]


def test_cluster_produces_no_noise(rng):
    labeling = HcaDbscan(0.3).fit(Dataset(rng.uniform(size=(300, 3)))).labeling_
    assert labeling.noise_count == 0
    assert set(labeling.labels.tolist()) == set(range(1, labeling.cluster_count + 1))


def test_cluster_rejects_mismatched_epsilon(rng):
    grid = build_grid(Dataset(rng.uniform(size=(10, 2))), 0.5)
    with pytest.raises(ConfigMismatch):
        cluster(grid, 0.6)


def test_fit_rejects_empty_dataset():
    with pytest.raises(EmptyInput):
        HcaDbscan(1.0).fit(Dataset(np.empty((0, 2))))


def test_exact_policy_equals_components(rng):
    dataset = Dataset(rng.uniform(0, 10, size=(500, 2)))
    hca = HcaDbscan(0.6, policy=MergePolicy.EXACT).fit(dataset).labeling_
    oracle = connectivity_components(dataset, 0.6)
    assert hca.same_partition(oracle)
    assert rand_index(hca, oracle) == 1.0


def test_exact_policy_equals_components_over_random_suite(random_suite):
    mismatches = 0
    for dataset, epsilon in random_suite(200, max_n=250):
        hca = HcaDbscan(epsilon, policy=MergePolicy.EXACT).fit(dataset).labeling_
        if not hca.same_partition(connectivity_components(dataset, epsilon)):
            mismatches += 1
    assert mismatches == 0


def test_representative_policy_refines_components(random_suite):
    violations = 0
    for dataset, epsilon in random_suite(200, max_n=250, seed=8):
        hca = HcaDbscan(epsilon).fit(dataset).labeling_
        if not refinement_check(hca, connectivity_components(dataset, epsilon)):
            violations += 1
    assert violations == 0


@pytest.mark.parametrize("kind,params,epsilon", [
    ("blobs", dict(n=900, d=2, k=3, spread=1.0), 3.0),
    ("blobs", dict(n=600, d=3, k=4, spread=0.5), 1.5),
    ("rings", dict(n=1000, d=2), 0.5),
    ("uniform", dict(n=800, d=2, extent=10.0), 0.4),
    ("uniform", dict(n=300, d=4, extent=3.0), 0.9),
])
def test_exact_policy_equals_components_on_generated_suites(kind, params, epsilon):
    for seed in range(3):
        dataset = generate(GeneratorSpec(kind=kind, seed=seed, **params))
        hca = HcaDbscan(epsilon, policy=MergePolicy.EXACT).fit(dataset).labeling_
        oracle = connectivity_components(dataset, epsilon)
        assert hca.same_partition(oracle)


def test_three_blobs_found_by_every_policy(blobs_2d):
    epsilon = 3.0
    oracle = connectivity_components(blobs_2d, epsilon)
    exact = HcaDbscan(epsilon, policy=MergePolicy.EXACT).fit(blobs_2d).labeling_
    representative = HcaDbscan(epsilon, min_cluster_size=20).fit(blobs_2d).labeling_
    assert oracle.cluster_count == 3
    assert exact.cluster_count == 3
    assert representative.cluster_count == 3


def test_representative_policy_fully_agrees_on_well_separated_blobs():
    scores = []
    for seed in range(3):
        dataset = generate(GeneratorSpec(kind="blobs", n=1500, d=2, seed=seed, k=3, spread=1.0))
        hca = HcaDbscan(6.0).fit(dataset).labeling_
        scores.append(rand_index(hca, connectivity_components(dataset, 6.0)))
    assert np.mean(scores) == 1.0


def test_high_dimensional_exact_clustering(rng):
    dataset = Dataset(np.vstack([rng.normal(0, 0.05, size=(30, 27)), rng.normal(3, 0.05, size=(30, 27))]))
    hca = HcaDbscan(1.0, policy=MergePolicy.EXACT).fit(dataset).labeling_
    assert hca.cluster_count == 2
    assert hca.same_partition(connectivity_components(dataset, 1.0))


# --- traversal ---

def test_chain_of_cells_is_one_component():
    # side 1: cells (0,0), (1,0), (2,0); the two outer cells are 1.8 apart
    coords = np.array([[0.0, 0.0], [0.9, 0.0], [1.8, 0.0], [2.7, 0.0]])
    grid = build_grid(Dataset(coords), math.sqrt(2))
    assert set(grid.cells) == {(0, 0), (1, 0), (2, 0)}
    component = traverse(grid, (0, 0), math.sqrt(2))
    assert component == set(grid.cells)


def test_layer_two_neighbor_joins_across_empty_cell():
    epsilon = math.sqrt(2)
    # side 1: cells (0,0) and (2,0) with (1,0) empty; points 0.8 apart
    coords = np.array([[0.95, 0.5], [2.05, 0.5]])
    coords = np.vstack([coords, [[0.0, 0.0]]])
    grid = build_grid(Dataset(coords), epsilon)
    assert set(grid.cells) == {(0, 0), (2, 0)}
    labeling = cluster(grid, epsilon)
    assert labeling.cluster_count == 1


def test_depth_and_breadth_orders_find_same_partition(rng):
    dataset = Dataset(rng.uniform(0, 6, size=(400, 2)))
    depth = HcaDbscan(0.5, order=TraversalOrder.DEPTH).fit(dataset).labeling_
    breadth = HcaDbscan(0.5, order=TraversalOrder.BREADTH).fit(dataset).labeling_
    assert depth.same_partition(breadth)
    assert np.array_equal(depth.labels, breadth.labels)


def test_traverse_rejects_visited_seed(rng):
    grid = build_grid(Dataset(rng.uniform(size=(20, 2))), 0.5)
    seed = min(grid.cells)
    traverse(grid, seed, 0.5)
    with pytest.raises(ValueError):
        traverse(grid, seed, 0.5)


def test_cluster_is_deterministic_and_idempotent(rng):
    dataset = Dataset(rng.uniform(0, 5, size=(300, 2)))
    grid = build_grid(dataset, 0.4)
    first = cluster(grid, 0.4)
    second = cluster(grid, 0.4)
    third = HcaDbscan(0.4).fit(dataset).labeling_
    assert np.array_equal(first.labels, second.labels)
    assert np.array_equal(first.labels, third.labels)


def test_stats_count_merge_tests(rng):
    grid = build_grid(Dataset(rng.uniform(0, 5, size=(300, 2))), 0.4)
    stats = TraversalStats()
    labeling = cluster(grid, 0.4, stats=stats)
    assert stats.occupied_cells == grid.occupied_cells
    assert stats.components == labeling.cluster_count
    assert 0 < stats.merge_tests <= stats.candidate_probes


def test_merge_tests_far_below_pairwise_count(rng):
    dataset = generate(GeneratorSpec(kind="blobs", n=5000, d=2, seed=3, k=3, spread=1.0))
    model = HcaDbscan(1.0).fit(dataset)
    assert model.stats_.merge_tests < 0.01 * dataset.n ** 2


# --- small-cluster filter ---

def test_filter_small_clusters_relabels_noise_and_renumbers():
    labeling = ClusterLabeling(np.array([1, 1, 2, 3, 3, 3]), 3)
    filtered = filter_small_clusters(labeling, 2)
    assert filtered.labels.tolist() == [1, 1, NOISE, 2, 2, 2]
    assert filtered.cluster_count == 2


def test_filter_small_clusters_disabled_keeps_labels():
    labeling = ClusterLabeling(np.array([1, 2, 2]), 2)
    assert filter_small_clusters(labeling, None).labels.tolist() == [1, 2, 2]
    assert filter_small_clusters(labeling, 1).cluster_count == 2
