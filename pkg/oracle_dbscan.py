"""
Reference clusterings and agreement metrics.

- dbscan: classic DBSCAN built directly on epsilon-neighborhoods, core points
  and density reachability, with a naive O(n) scan per neighborhood query
- connectivity_components: components of the graph joining every pair of
  points within epsilon (DBSCAN with minpts = 1)
- rand_index / refinement_check / agreement: compare two labelings

Points are visited in index order, so every output is deterministic. Border
points reachable from several clusters stay in the first one that claimed them.
"""

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Set, Tuple

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist
from sklearn.metrics.cluster import pair_confusion_matrix

from hca_errors import LabelingMismatch
from hca_types import NOISE, ClusterLabeling, Dataset, Point, singleton_noise
from hypercube_grid import validate_epsilon

log = logging.getLogger(__name__)

UNCLASSIFIED = 0


class Comparator(str, Enum):
    LE = "le"
    LT = "lt"

    def within(self, distances, epsilon):
        if self is Comparator.LE:
            return distances <= epsilon
        return distances < epsilon


@dataclass(frozen=True)
class DbscanParams:
    epsilon: float
    minpts: int = 1
    comparator: Comparator = Comparator.LE

    def __post_init__(self):
        object.__setattr__(self, "epsilon", validate_epsilon(self.epsilon))
        object.__setattr__(self, "comparator", Comparator(self.comparator))
        if int(self.minpts) < 1:
            raise ValueError(f"minpts must be >= 1 (got {self.minpts})")
        object.__setattr__(self, "minpts", int(self.minpts))


@dataclass(frozen=True)
class AgreementReport:
    rand_index: float
    identical: bool
    cluster_counts: Tuple[int, int]
    mismatched_pairs: int


def _region_query(coords, position, epsilon, comparator) -> np.ndarray:
    distances = cdist(coords[position:position + 1], coords)[0]
    return np.flatnonzero(comparator.within(distances, epsilon))


def epsilon_neighborhood(p: Point, dataset: Dataset, params: DbscanParams) -> Set[int]:
    """Indices of all points q with dist(p, q) cmp epsilon, p itself included."""
    distances = cdist(np.asarray(p.coords, dtype=np.float64).reshape(1, -1), dataset.coords)[0]
    mask = params.comparator.within(distances, params.epsilon)
    return set(dataset.index[mask].tolist())


def _by_index(dataset: Dataset) -> Dataset:
    if dataset.n and not np.array_equal(dataset.index, np.arange(dataset.n)):
        return dataset.by_index()
    return dataset


def dbscan(dataset: Dataset, params: DbscanParams) -> ClusterLabeling:
    """
    Classic DBSCAN.

    Args:
        dataset (Dataset): input points
        params (DbscanParams): epsilon, minpts and comparator

    Returns:
        ClusterLabeling: clusters 1..k in discovery order, NOISE for unreachable non-core points
    """
    data = _by_index(dataset)
    coords = data.coords
    labels = np.full(data.n, UNCLASSIFIED, dtype=np.int64)
    cluster_id = 0

    for position in range(data.n):
        if labels[position] != UNCLASSIFIED:
            continue
        neighbors = _region_query(coords, position, params.epsilon, params.comparator)
        if len(neighbors) < params.minpts:
            labels[position] = NOISE
            continue

        cluster_id += 1
        labels[position] = cluster_id
        queue = deque()
        while True:
            current = labels[neighbors]
            fresh = neighbors[current == UNCLASSIFIED]
            labels[fresh] = cluster_id
            labels[neighbors[current == NOISE]] = cluster_id
            queue.extend(fresh.tolist())
            if not queue:
                break
            neighbors = np.empty(0, dtype=np.int64)
            while queue and len(neighbors) == 0:
                candidate = queue.popleft()
                found = _region_query(coords, candidate, params.epsilon, params.comparator)
                if len(found) >= params.minpts:
                    neighbors = found
            if len(neighbors) == 0:
                break

    log.debug("DBSCAN found %d clusters, %d noise points", cluster_id, int(np.count_nonzero(labels == NOISE)))
    return ClusterLabeling(labels, cluster_id)


def connectivity_components(dataset: Dataset, epsilon, comparator=Comparator.LT) -> ClusterLabeling:
    """Connected components of the within-epsilon graph, ids in first-point order, no NOISE."""
    epsilon = validate_epsilon(epsilon)
    comparator = Comparator(comparator)
    data = _by_index(dataset)
    coords = data.coords
    labels = np.full(data.n, UNCLASSIFIED, dtype=np.int64)
    cluster_id = 0

    for position in range(data.n):
        if labels[position] != UNCLASSIFIED:
            continue
        cluster_id += 1
        labels[position] = cluster_id
        frontier = deque([position])
        while frontier:
            neighbors = _region_query(coords, frontier.popleft(), epsilon, comparator)
            fresh = neighbors[labels[neighbors] == UNCLASSIFIED]
            labels[fresh] = cluster_id
            frontier.extend(fresh.tolist())

    return ClusterLabeling(labels, cluster_id)


def point_classes(dataset: Dataset, params: DbscanParams) -> np.ndarray:
    """Classify every point (in index order) as 'core', 'border' or 'noise'."""
    data = _by_index(dataset)
    neighborhoods = [_region_query(data.coords, pos, params.epsilon, params.comparator) for pos in range(data.n)]
    core = np.array([len(nb) >= params.minpts for nb in neighborhoods], dtype=bool)
    classes = np.full(data.n, "noise", dtype=object)
    for pos, nb in enumerate(neighborhoods):
        if core[pos]:
            classes[pos] = "core"
        elif core[nb].any():
            classes[pos] = "border"
    return classes


def _check_lengths(a: ClusterLabeling, b: ClusterLabeling):
    if a.n != b.n:
        raise LabelingMismatch(a.n, b.n)


def _pair_counts(a: ClusterLabeling, b: ClusterLabeling):
    _check_lengths(a, b)
    if a.n < 2:
        return 0, 0
    counts = pair_confusion_matrix(singleton_noise(a.labels), singleton_noise(b.labels))
    # pair_confusion_matrix counts ordered pairs
    total = int(counts.sum()) // 2
    disagree = int(counts[0, 1] + counts[1, 0]) // 2
    return total, disagree


def rand_index(a: ClusterLabeling, b: ClusterLabeling) -> float:
    """Fraction of unordered point pairs on which both labelings agree; NOISE points are singletons."""
    total, disagree = _pair_counts(a, b)
    if total == 0:
        return 1.0
    return (total - disagree) / total


def refinement_check(fine: ClusterLabeling, coarse: ClusterLabeling) -> bool:
    """True when every cluster of `fine` lies inside exactly one cluster of `coarse`."""
    _check_lengths(fine, coarse)
    if fine.n == 0:
        return True
    frame = pd.DataFrame({"fine": singleton_noise(fine.labels), "coarse": singleton_noise(coarse.labels)})
    return bool(frame.groupby("fine")["coarse"].nunique().max() <= 1)


def agreement(a: ClusterLabeling, b: ClusterLabeling) -> AgreementReport:
    total, disagree = _pair_counts(a, b)
    score = 1.0 if total == 0 else (total - disagree) / total
    return AgreementReport(
        rand_index=score,
        identical=disagree == 0,
        cluster_counts=(a.cluster_count, b.cluster_count),
        mismatched_pairs=disagree,
    )
