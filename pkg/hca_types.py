"""
Shared data types: points, datasets, grid geometry, cell records and labelings.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

# Cell indices along each axis, measured from the shifted origin.
CellKey = Tuple[int, ...]

# Sign vector in {-1, 0, +1}^d, never all zero.
Direction = Tuple[int, ...]

NOISE = -1


@dataclass(frozen=True)
class Point:
    index: int
    coords: np.ndarray


@dataclass(eq=False)
class Dataset:
    """
    Ordered collection of d-dimensional points with stable indices.

    Args:
        coords (np.ndarray): (n, d) array of finite coordinates
        index (np.ndarray, optional): original point indices; defaults to 0..n-1
    """
    coords: np.ndarray
    index: Optional[np.ndarray] = None

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.coords.ndim != 2 or self.coords.shape[1] < 1:
            raise ValueError(f"coords must be an (n, d) array with d >= 1, got shape {self.coords.shape}")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("coords must be finite (no NaN or infinity)")
        if self.index is None:
            self.index = np.arange(self.coords.shape[0], dtype=np.int64)
        else:
            self.index = np.asarray(self.index, dtype=np.int64)
            if self.index.shape != (self.coords.shape[0],):
                raise ValueError("index must have one entry per point")

    @classmethod
    def from_points(cls, rows, d=None):
        rows = list(rows)
        if not rows:
            return cls(np.empty((0, d or 1)))
        return cls(np.asarray(rows, dtype=np.float64).reshape(len(rows), -1))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def point(self, position) -> Point:
        return Point(int(self.index[position]), self.coords[position])

    def points(self) -> Iterator[Point]:
        for position in range(self.n):
            yield self.point(position)

    def by_index(self) -> "Dataset":
        """Return the dataset reordered so that position equals point index."""
        order = np.argsort(self.index, kind="stable")
        return Dataset(self.coords[order], self.index[order])


@dataclass(frozen=True, eq=False)
class GridConfig:
    """Geometry of the hypercube overlay: side * sqrt(d) == epsilon."""
    epsilon: float
    d: int
    origin: np.ndarray
    side: float

    @classmethod
    def for_epsilon(cls, epsilon, d, origin):
        return cls(float(epsilon), int(d), np.asarray(origin, dtype=np.float64), float(epsilon) / math.sqrt(d))

    def cell_of(self, shifted_coords) -> CellKey:
        return tuple(int(k) for k in np.floor(np.asarray(shifted_coords, dtype=np.float64) / self.side))

    def cells_of(self, shifted: np.ndarray) -> np.ndarray:
        return np.floor(shifted / self.side).astype(np.int64)


@dataclass(frozen=True, order=True)
class NeighborOffset:
    delta: Tuple[int, ...]
    layer: int


@dataclass(eq=False)
class CellRecord:
    """
    One occupied hypercube.

    `points` holds the original coordinates of the members (used for every
    epsilon test); `shifted` holds origin-shifted coordinates (used for cell
    bounds and ideal positions). Both are aligned with `members`.
    """
    key: CellKey
    members: List[int] = field(default_factory=list)
    points: Optional[np.ndarray] = None
    shifted: Optional[np.ndarray] = None
    representatives: Dict[Direction, int] = field(default_factory=dict)
    visited: bool = False
    cluster: Optional[int] = None
    # direction -> (distance to ideal position, slot in members)
    rep_state: Dict[Direction, Tuple[float, int]] = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(eq=False)
class SparseGrid:
    config: GridConfig
    cells: Dict[CellKey, CellRecord]
    n: int
    offset_limit: int = 200000
    _key_array: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def occupied_cells(self) -> int:
        return len(self.cells)

    def key_array(self) -> np.ndarray:
        if self._key_array is None:
            self._key_array = np.array(list(self.cells), dtype=np.int64).reshape(len(self.cells), self.config.d)
        return self._key_array


@dataclass(eq=False)
class ClusterLabeling:
    """Per-point cluster ids 1..cluster_count, or NOISE (-1)."""
    labels: np.ndarray
    cluster_count: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def noise_count(self) -> int:
        return int(np.count_nonzero(self.labels == NOISE))

    def cluster_sizes(self) -> Dict[int, int]:
        ids, counts = np.unique(self.labels[self.labels != NOISE], return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}

    def same_partition(self, other: "ClusterLabeling") -> bool:
        """True when both labelings group points identically, ignoring id names."""
        if self.n != other.n:
            return False
        a = singleton_noise(self.labels)
        b = singleton_noise(other.labels)
        pairs = np.unique(np.stack([a, b], axis=1), axis=0)
        return len(pairs) == len(np.unique(a)) == len(np.unique(b))


def singleton_noise(labels: np.ndarray) -> np.ndarray:
    """Replace each NOISE label with a fresh id so noise points act as singleton clusters."""
    labels = np.asarray(labels, dtype=np.int64).copy()
    noise = labels == NOISE
    if noise.any():
        start = (labels.max() if labels.size else 0) + 1
        labels[noise] = np.arange(start, start + int(noise.sum()))
    return labels


def relabel_first_seen(labels: np.ndarray) -> Tuple[np.ndarray, int]:
    """Renumber non-noise ids to 1..k in order of first appearance."""
    labels = np.asarray(labels, dtype=np.int64)
    out = np.full(labels.shape, NOISE, dtype=np.int64)
    mapping = {}
    for pos, label in enumerate(labels.tolist()):
        if label == NOISE:
            continue
        if label not in mapping:
            mapping[label] = len(mapping) + 1
        out[pos] = mapping[label]
    return out, len(mapping)
