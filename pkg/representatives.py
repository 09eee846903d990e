"""
Representative points of occupied hypercubes.

Every occupied cell keeps, per boundary direction, the member point closest to
the ideal position for that direction (the point on the cell boundary farthest
toward it). Two neighboring cells are compared through the representatives of
facing directions instead of through all member pairs.

Representatives are materialized lazily: a direction is computed the first
time a merge test asks for it and memoized on the cell. Eager mode fills every
one of the 3^d - 1 directions point by point as members are inserted and is
only allowed for small d.
"""

import itertools
from functools import lru_cache
from typing import Tuple

import numpy as np

from hca_errors import NotOriginShifted, WrongCell
from hca_types import CellKey, CellRecord, Direction, GridConfig, NeighborOffset, Point

COMPASS_NAMES = {
    (0, 1): "Top",
    (1, 1): "TopRight",
    (1, 0): "Right",
    (1, -1): "BottomRight",
    (0, -1): "Bottom",
    (-1, -1): "BottomLeft",
    (-1, 0): "Left",
    (-1, 1): "TopLeft",
}


@lru_cache(maxsize=None)
def all_directions(d) -> Tuple[Direction, ...]:
    """All 3^d - 1 nonzero sign vectors, in lexicographic order."""
    return tuple(s for s in itertools.product((-1, 0, 1), repeat=d) if any(s))


def direction_name(direction: Direction) -> str:
    if len(direction) == 2:
        return COMPASS_NAMES[tuple(direction)]
    return "".join({-1: "-", 0: "0", 1: "+"}[s] for s in direction)


def ideal_position(key: CellKey, direction: Direction, config: GridConfig) -> np.ndarray:
    """Cell center plus direction * side/2, in shifted coordinates."""
    center = (np.asarray(key, dtype=np.float64) + 0.5) * config.side
    return center + np.asarray(direction, dtype=np.float64) * (config.side / 2.0)


def _distances(coords, target):
    # Shared by the eager and lazy paths so both produce bit-identical values
    return np.sqrt(((np.atleast_2d(coords) - target) ** 2).sum(axis=1))


def update_representatives(cell: CellRecord, point: Point, config: GridConfig, original=None, eager=True) -> CellRecord:
    """
    Insert a point into a cell and update the representative table.

    Args:
        cell (CellRecord): the cell receiving the point
        point (Point): the point, with origin-shifted coordinates
        config (GridConfig): grid geometry
        original (np.ndarray, optional): the point's original coordinates;
            defaults to shifted coordinates plus the grid origin
        eager (bool): when True the first inserted point initializes every
            direction; when False only already-materialized directions are kept current

    Returns:
        CellRecord: the same cell, updated
    """
    coords = np.asarray(point.coords, dtype=np.float64)
    if np.any(coords < 0):
        raise NotOriginShifted(coords)
    actual = config.cell_of(coords)
    if actual != tuple(cell.key):
        raise WrongCell(point.index, tuple(cell.key), actual)

    if original is None:
        original = coords + config.origin
    original = np.asarray(original, dtype=np.float64)

    first = len(cell.members) == 0
    slot = len(cell.members)
    cell.members.append(int(point.index))
    if first:
        cell.shifted = coords.reshape(1, -1).copy()
        cell.points = original.reshape(1, -1).copy()
    else:
        cell.shifted = np.vstack([cell.shifted, coords])
        cell.points = np.vstack([cell.points, original])

    if first and eager:
        directions = all_directions(config.d)
    else:
        directions = list(cell.rep_state)
    if not directions:
        return cell

    center = (np.asarray(cell.key, dtype=np.float64) + 0.5) * config.side
    ideals = center + np.asarray(directions, dtype=np.float64) * (config.side / 2.0)
    dists = _distances(ideals, coords)

    for direction, dist in zip(directions, dists.tolist()):
        current = cell.rep_state.get(direction)
        if current is None or (dist, point.index) < (current[0], cell.members[current[1]]):
            cell.rep_state[direction] = (dist, slot)
            cell.representatives[direction] = int(point.index)
    return cell


def representative_slot(cell: CellRecord, direction: Direction, config: GridConfig) -> int:
    """Position within cell.members of the representative for a direction."""
    direction = tuple(direction)
    state = cell.rep_state.get(direction)
    if state is not None:
        return state[1]

    dists = _distances(cell.shifted, ideal_position(cell.key, direction, config))
    # Ties on distance go to the lower point index
    slot = int(np.lexsort((np.asarray(cell.members), dists))[0])
    cell.rep_state[direction] = (float(dists[slot]), slot)
    cell.representatives[direction] = cell.members[slot]
    return slot


def representative_for(cell: CellRecord, direction: Direction, config: GridConfig) -> int:
    """Point index of the representative for a direction, computed on first access."""
    return cell.members[representative_slot(cell, direction, config)]


def paired_direction(delta) -> Tuple[Direction, Direction]:
    """Facing directions for an offset: (sign(delta) for the source, -sign(delta) for the target)."""
    if isinstance(delta, NeighborOffset):
        delta = delta.delta
    sign = tuple(int(s) for s in np.sign(delta))
    return sign, tuple(-s for s in sign)
