"""
HyperCube Accelerated DBSCAN

Clusters a dataset by finding connected components of the occupied-cell graph:
two occupied cells at a pruned neighbor offset are joined when the merge
condition holds, and every member of a cell takes its component's id.

- representative policy: the facing representative points of the two cells
  are closer than epsilon
- exact policy: some cross-cell member pair is closer than epsilon; this equals
  the epsilon-connectivity components of the points

Component ids are assigned in first-touch order while seeding from occupied
cells in lexicographic key order, starting at 1. No NOISE labels are produced
unless the optional minimum cluster size filter is applied.
"""

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Set

import numpy as np
from scipy.spatial.distance import cdist

from hca_errors import ConfigMismatch, EmptyInput
from hca_types import NOISE, CellKey, CellRecord, ClusterLabeling, Dataset, GridConfig, SparseGrid
from hypercube_grid import build_grid, candidate_neighbors, validate_epsilon
from representatives import paired_direction, representative_slot

log = logging.getLogger(__name__)

# Rows of one cell compared per cdist call in exact mode
EXACT_CHUNK = 1024


class MergePolicy(str, Enum):
    REPRESENTATIVE = "representative"
    EXACT = "exact"


class TraversalOrder(str, Enum):
    DEPTH = "depth"
    BREADTH = "breadth"


@dataclass
class TraversalStats:
    merge_tests: int = 0
    candidate_probes: int = 0
    occupied_cells: int = 0
    components: int = 0


def _any_within(a_points, b_points, epsilon) -> bool:
    for start in range(0, a_points.shape[0], EXACT_CHUNK):
        if np.any(cdist(a_points[start:start + EXACT_CHUNK], b_points) < epsilon):
            return True
    return False


def merge_condition(a: CellRecord, b: CellRecord, delta, epsilon, policy, config: GridConfig) -> bool:
    """
    Decide whether two occupied cells at offset delta belong to one cluster.

    Args:
        a (CellRecord): source cell
        b (CellRecord): target cell, at offset delta from a
        delta (NeighborOffset or tuple): integer cell displacement b - a
        epsilon (float): density radius (strict < comparison)
        policy (MergePolicy or str): representative or exact
        config (GridConfig): grid geometry

    Returns:
        bool: True when the cells should be merged
    """
    policy = MergePolicy(policy)
    if policy is MergePolicy.EXACT:
        return _any_within(a.points, b.points, epsilon)

    source_dir, target_dir = paired_direction(delta)
    slot_a = representative_slot(a, source_dir, config)
    slot_b = representative_slot(b, target_dir, config)
    dist = cdist(a.points[slot_a:slot_a + 1], b.points[slot_b:slot_b + 1])[0, 0]
    return bool(dist < epsilon)


def traverse(grid: SparseGrid, seed: CellKey, epsilon, policy=MergePolicy.REPRESENTATIVE,
             cluster_id=1, order=TraversalOrder.DEPTH, stats: Optional[TraversalStats] = None) -> Set[CellKey]:
    """
    Collect the component of seed in the cell graph.

    Neighbors are examined layer by layer (immediate neighbors before the
    outer layer). Cells already visited are skipped: the merge condition is
    symmetric, so a visited neighbor is always in the current component.
    """
    seed = tuple(seed)
    start = grid.cells[seed]
    if start.visited:
        raise ValueError(f"seed cell {seed} is already assigned to cluster {start.cluster}")
    order = TraversalOrder(order)
    stats = stats if stats is not None else TraversalStats()

    start.visited = True
    start.cluster = cluster_id
    component = {seed}
    work = deque([seed])
    take = work.pop if order is TraversalOrder.DEPTH else work.popleft

    while work:
        key = take()
        cell = grid.cells[key]
        candidates = candidate_neighbors(grid, key)
        stats.candidate_probes += len(candidates)
        for offset, other_key in candidates:
            other = grid.cells[other_key]
            if other.visited:
                continue
            stats.merge_tests += 1
            if merge_condition(cell, other, offset, epsilon, policy, grid.config):
                other.visited = True
                other.cluster = cluster_id
                component.add(other_key)
                work.append(other_key)
    return component


def cluster(grid: SparseGrid, epsilon, policy=MergePolicy.REPRESENTATIVE,
            order=TraversalOrder.DEPTH, stats: Optional[TraversalStats] = None) -> ClusterLabeling:
    """
    Label every point with the id of its cell's component.

    Args:
        grid (SparseGrid): grid built with the same epsilon
        epsilon (float): density radius
        policy (MergePolicy or str): representative (default) or exact
        order (TraversalOrder or str): depth or breadth visit order
        stats (TraversalStats, optional): counters filled during the run

    Returns:
        ClusterLabeling: ids 1..k, no NOISE
    """
    if float(epsilon) != grid.config.epsilon:
        raise ConfigMismatch(f"grid was built for epsilon {grid.config.epsilon}, not {epsilon}")
    policy = MergePolicy(policy)
    stats = stats if stats is not None else TraversalStats()
    stats.occupied_cells = grid.occupied_cells

    for cell in grid.cells.values():
        cell.visited = False
        cell.cluster = None

    labels = np.full(grid.n, NOISE, dtype=np.int64)
    cluster_id = 0
    for seed in sorted(grid.cells):
        if grid.cells[seed].visited:
            continue
        cluster_id += 1
        for key in traverse(grid, seed, epsilon, policy, cluster_id, order, stats):
            labels[grid.cells[key].members] = cluster_id

    stats.components = cluster_id
    log.debug("Clustered %d cells into %d components with %d merge tests",
              grid.occupied_cells, cluster_id, stats.merge_tests)
    return ClusterLabeling(labels, cluster_id)


def filter_small_clusters(labeling: ClusterLabeling, min_size) -> ClusterLabeling:
    """Relabel clusters with fewer than min_size points as NOISE and renumber the rest."""
    if not min_size or min_size <= 1:
        return ClusterLabeling(labeling.labels.copy(), labeling.cluster_count)
    sizes = labeling.cluster_sizes()
    kept = sorted(cid for cid, size in sizes.items() if size >= min_size)
    mapping = np.full(labeling.cluster_count + 1, NOISE, dtype=np.int64)
    for new_id, old_id in enumerate(kept, start=1):
        mapping[old_id] = new_id
    labels = labeling.labels.copy()
    clustered = labels != NOISE
    labels[clustered] = mapping[labels[clustered]]
    return ClusterLabeling(labels, len(kept))


class HcaDbscan:
    """
    Estimator-style wrapper: build the grid, cluster, optionally denoise.

    Attributes set by fit:
        grid_ (SparseGrid), labeling_ (ClusterLabeling), stats_ (TraversalStats)
    """

    def __init__(self, epsilon, policy=MergePolicy.REPRESENTATIVE, order=TraversalOrder.DEPTH,
                 min_cluster_size=None, eager_representatives=False, offset_limit=200000, eager_max_dim=10):
        self.epsilon = validate_epsilon(epsilon)
        self.policy = MergePolicy(policy)
        self.order = TraversalOrder(order)
        self.min_cluster_size = min_cluster_size
        self.eager_representatives = eager_representatives
        self.offset_limit = offset_limit
        self.eager_max_dim = eager_max_dim

        self.grid_ = None
        self.labeling_ = None
        self.stats_ = None

    def fit(self, dataset: Dataset) -> "HcaDbscan":
        if dataset.n == 0:
            raise EmptyInput()
        self.grid_ = build_grid(dataset, self.epsilon, eager_representatives=self.eager_representatives,
                                offset_limit=self.offset_limit, eager_max_dim=self.eager_max_dim)
        self.stats_ = TraversalStats()
        labeling = cluster(self.grid_, self.epsilon, self.policy, self.order, self.stats_)
        if self.min_cluster_size:
            labeling = filter_small_clusters(labeling, self.min_cluster_size)
        self.labeling_ = labeling
        return self

    def fit_predict(self, dataset: Dataset) -> np.ndarray:
        return self.fit(dataset).labeling_.labels
