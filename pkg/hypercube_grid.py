"""
Hypercube Grid

Builds the origin-shifted sparse hypercube grid used by HCA-DBSCAN and
enumerates the geometrically pruned set of neighbor offsets.

The cell side is epsilon / sqrt(d), so the space diagonal of every cell equals
epsilon and any two points inside one (half-open) cell are closer than epsilon.
Only occupied cells are stored, keyed by their integer cell coordinates.
"""

import logging
import math
import operator
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from hca_errors import EmptyInput, InvalidEpsilon, NotOriginShifted, UnsupportedDimension
from hca_types import CellKey, CellRecord, Dataset, GridConfig, NeighborOffset, Point, SparseGrid
from representatives import update_representatives

log = logging.getLogger(__name__)


def shift_origin(dataset: Dataset) -> Tuple[Dataset, np.ndarray]:
    """Subtract the componentwise minimum so that every coordinate is >= 0."""
    if dataset.n == 0:
        raise EmptyInput()
    origin = dataset.coords.min(axis=0)
    return Dataset(dataset.coords - origin, dataset.index.copy()), origin


def sort_dataset(dataset: Dataset) -> Dataset:
    """Order points lexicographically by (coord[0], ..., coord[d-1], original index)."""
    if dataset.n == 0:
        return Dataset(dataset.coords.copy(), dataset.index.copy())
    # np.lexsort treats the last key as the primary one
    keys = [dataset.index] + [dataset.coords[:, axis] for axis in reversed(range(dataset.d))]
    order = np.lexsort(keys)
    return Dataset(dataset.coords[order], dataset.index[order])


def assign_cell(point: Point, config: GridConfig) -> CellKey:
    coords = np.asarray(point.coords, dtype=np.float64)
    if np.any(coords < 0):
        raise NotOriginShifted(coords)
    return config.cell_of(coords)


def validate_epsilon(epsilon):
    try:
        value = float(epsilon)
    except (TypeError, ValueError):
        raise InvalidEpsilon(epsilon)
    if not math.isfinite(value) or value <= 0:
        raise InvalidEpsilon(epsilon)
    return value


def build_grid(dataset: Dataset, epsilon, eager_representatives=False, offset_limit=200000,
               eager_max_dim=10) -> SparseGrid:
    """
    Place every point of the dataset into its occupied hypercube.

    Args:
        dataset (Dataset): input points in original coordinates
        epsilon (float): density radius; cell side is epsilon / sqrt(d)
        eager_representatives (bool): fill all 3^d - 1 representatives per cell
            while inserting points (only for d <= eager_max_dim)
        offset_limit (int): largest raw offset block enumerated by neighbor probing
        eager_max_dim (int): dimensionality cap for eager representatives

    Returns:
        SparseGrid: occupied cells only, in lexicographic key order
    """
    epsilon = validate_epsilon(epsilon)
    if dataset.n == 0:
        raise EmptyInput()
    if eager_representatives and dataset.d > eager_max_dim:
        raise UnsupportedDimension(
            f"eager representatives need 3^d - 1 entries per cell; d = {dataset.d} exceeds the cap of {eager_max_dim}"
        )

    ordered = sort_dataset(dataset)
    shifted, origin = shift_origin(ordered)
    config = GridConfig.for_epsilon(epsilon, dataset.d, origin)
    keys = config.cells_of(shifted.coords)

    cells = {}
    if eager_representatives:
        for position in range(ordered.n):
            key = tuple(int(k) for k in keys[position])
            cell = cells.get(key)
            if cell is None:
                cell = cells[key] = CellRecord(key)
            update_representatives(cell, shifted.point(position), config, original=ordered.coords[position], eager=True)
        cells = {key: cells[key] for key in sorted(cells)}
    else:
        unique_keys, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        order = np.argsort(inverse, kind="stable")
        bounds = np.cumsum(np.bincount(inverse, minlength=len(unique_keys)))[:-1]
        for key, positions in zip(unique_keys.tolist(), np.split(order, bounds)):
            key = tuple(key)
            cells[key] = CellRecord(
                key,
                members=ordered.index[positions].tolist(),
                points=ordered.coords[positions],
                shifted=shifted.coords[positions],
            )

    log.debug("Built grid: %d points in %d occupied cells (side %.6g)", dataset.n, len(cells), config.side)
    return SparseGrid(config=config, cells=cells, n=dataset.n, offset_limit=offset_limit)


def chebyshev_radius(d) -> int:
    return math.isqrt(d - 1) + 1 if d > 0 else 0


def _gap_cost(value) -> int:
    gap = max(abs(value) - 1, 0)
    return gap * gap


@lru_cache(maxsize=None)
def neighbor_offsets(d) -> Tuple[NeighborOffset, ...]:
    """
    All nonzero offsets whose cells can hold a pair of points closer than epsilon.

    An offset survives when sqrt(sum(max(|delta_i| - 1, 0)^2)) < sqrt(d), which
    is compared exactly on integers as sum(...) < d. Sorted lexicographically.
    """
    if d < 1:
        raise UnsupportedDimension(f"dimensionality must be >= 1 (got {d})")
    r = chebyshev_radius(d)
    found = []
    prefix = []

    def extend(depth, cost):
        if depth == d:
            if any(prefix):
                found.append(NeighborOffset(tuple(prefix), max(abs(v) for v in prefix)))
            return
        for value in range(-r, r + 1):
            total = cost + _gap_cost(value)
            if total >= d:
                continue
            prefix.append(value)
            extend(depth + 1, total)
            prefix.pop()

    extend(0, 0)
    return tuple(found)


@lru_cache(maxsize=None)
def layered_offsets(d) -> Tuple[NeighborOffset, ...]:
    """neighbor_offsets ordered by (layer, delta): immediate neighbors first."""
    return tuple(sorted(neighbor_offsets(d), key=lambda o: (o.layer, o.delta)))


def min_cell_distance(delta, side) -> float:
    """Infimum distance between two points in cells separated by delta."""
    return side * math.sqrt(sum(_gap_cost(int(v)) for v in delta))


def corner_count(d) -> int:
    """Offsets with every |delta_i| == ceil(sqrt(d)) that fail the pruning predicate."""
    r = chebyshev_radius(d)
    return 2 ** d if d * _gap_cost(r) >= d else 0


def closed_form_neighbor_count(d) -> int:
    """(2 * ceil(sqrt(d)) + 1)^d - (C + 1)."""
    return (2 * chebyshev_radius(d) + 1) ** d - (corner_count(d) + 1)


def _use_probing(grid: SparseGrid) -> bool:
    d = grid.config.d
    raw_block = (2 * chebyshev_radius(d) + 1) ** d
    if raw_block > grid.offset_limit:
        return False
    return len(neighbor_offsets(d)) <= grid.occupied_cells


def candidate_neighbors(grid: SparseGrid, key: CellKey) -> List[Tuple[NeighborOffset, CellKey]]:
    """
    Occupied cells at a pruned offset from key, ordered by (layer, delta).

    Probes the cell map with every offset while the offset set stays small;
    otherwise scans all occupied keys with the same predicate.
    """
    d = grid.config.d
    cells = grid.cells
    if _use_probing(grid):
        found = []
        for offset in layered_offsets(d):
            other = tuple(map(operator.add, key, offset.delta))
            if other in cells:
                found.append((offset, other))
        return found

    keys = grid.key_array()
    diff = keys - np.asarray(key, dtype=np.int64)
    gaps = np.maximum(np.abs(diff) - 1, 0)
    mask = ((gaps * gaps).sum(axis=1) < d) & np.any(diff != 0, axis=1)
    found = []
    for delta, other in zip(diff[mask].tolist(), keys[mask].tolist()):
        found.append((NeighborOffset(tuple(delta), max(abs(v) for v in delta)), tuple(other)))
    found.sort(key=lambda item: (item[0].layer, item[0].delta))
    return found
