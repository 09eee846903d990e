"""
Dataset ingestion, synthetic generation and label output.

CSV files hold one point per row, every column a real coordinate. Numbers are
written in shortest round-trip decimal form so that write followed by load
reproduces coordinates exactly. Generated datasets come from numpy's
Generator(PCG64(seed)), so the same spec yields bit-identical data on every
platform.
"""

import logging
import math
import os
import re
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from hca_errors import (DataIoError, EmptyInput, InvalidGeneratorSpec, ParseError, SchemaError,
                        UnsupportedDimension)
from hca_types import NOISE, ClusterLabeling, Dataset

log = logging.getLogger(__name__)

GENERATOR_KINDS = ("blobs", "rings", "uniform")

# pandas reports ragged rows as "Expected 2 fields in line 3, saw 3"
_RAGGED_LINE = re.compile(r"line (\d+)")


@dataclass(frozen=True)
class CsvSchema:
    """has_header None means detect: row 1 is a header when any of its fields is not a number."""
    has_header: Optional[bool] = None
    delimiter: str = ","

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError(f"delimiter must be a single character (got {self.delimiter!r})")


@dataclass(frozen=True)
class GeneratorSpec:
    """
    Parameters of a synthetic dataset.

    Args:
        kind (str): blobs, rings or uniform
        n (int): number of points
        d (int): dimensionality
        seed (int): PRNG seed (64-bit)
        k (int): blob count
        spread (float): blob standard deviation sigma
        separation (float, optional): blob lattice spacing, default 16 * sigma, at least 6 * sigma
        radii (tuple): ring radii
        thickness (float): ring width
        extent (float): side of the uniform box [0, extent]^d
    """
    kind: str
    n: int
    d: int = 2
    seed: int = 0
    k: int = 3
    spread: float = 1.0
    separation: Optional[float] = None
    radii: Tuple[float, ...] = (1.0, 3.0)
    thickness: float = 0.2
    extent: float = 1.0

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise InvalidGeneratorSpec(
                f"unknown generator kind {self.kind!r}; expected one of {', '.join(GENERATOR_KINDS)}"
            )
        if self.n < 1:
            raise InvalidGeneratorSpec(f"n must be positive (got {self.n})")
        if self.d < 1:
            raise InvalidGeneratorSpec(f"d must be positive (got {self.d})")
        if self.kind == "rings" and self.d != 2:
            raise UnsupportedDimension(f"rings are only defined for d = 2 (got d = {self.d})")
        if self.kind == "blobs":
            if self.k < 1:
                raise InvalidGeneratorSpec(f"k must be positive (got {self.k})")
            if not self.spread > 0:
                raise InvalidGeneratorSpec(f"spread must be positive (got {self.spread})")
            if self.separation is not None and self.separation < 6 * self.spread:
                raise InvalidGeneratorSpec(
                    f"separation {self.separation} is below 6 * spread ({6 * self.spread}); blobs would overlap"
                )
        if self.kind == "rings":
            if not self.radii or any(r <= 0 for r in self.radii):
                raise InvalidGeneratorSpec(f"ring radii must be positive (got {self.radii})")
            if self.thickness < 0:
                raise InvalidGeneratorSpec(f"thickness must be >= 0 (got {self.thickness})")
        if self.kind == "uniform" and not self.extent > 0:
            raise InvalidGeneratorSpec(f"extent must be positive (got {self.extent})")

    @property
    def blob_separation(self) -> float:
        return self.separation if self.separation is not None else 16.0 * self.spread


def _line_number(position, has_header) -> int:
    return position + 1 + (1 if has_header else 0)


def _is_numeric_row(values) -> bool:
    try:
        [float(value) for value in values]
    except (TypeError, ValueError):
        return False
    return True


def _drop_trailing_blank_rows(frame: pd.DataFrame) -> pd.DataFrame:
    blank = (frame.fillna("").apply(lambda column: column.str.strip()) == "").all(axis=1).to_numpy()
    filled = np.flatnonzero(~blank)
    return frame.iloc[: filled[-1] + 1] if len(filled) else frame.iloc[:0]


def load_csv(path, schema: CsvSchema = CsvSchema()) -> Dataset:
    """
    Read a numeric CSV file into a Dataset, one point per data row.

    Args:
        path (str): file to read
        schema (CsvSchema): header flag (None detects it) and delimiter

    Returns:
        Dataset: index = row order, d = column count

    Raises:
        DataIoError: the file cannot be read
        SchemaError: rows have different field counts
        ParseError: a field is not a finite real number
    """
    if not os.path.isfile(path):
        raise DataIoError(f"cannot read {path}: no such file")
    try:
        frame = pd.read_csv(path, sep=schema.delimiter, header=None, dtype=str,
                            keep_default_na=False, skip_blank_lines=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyInput(f"{path} contains no data")
    except pd.errors.ParserError as e:
        match = _RAGGED_LINE.search(str(e))
        row = int(match.group(1)) if match else 0
        raise SchemaError(row, "field count differs from the first row")
    except (OSError, UnicodeDecodeError) as e:
        raise DataIoError(f"cannot read {path}: {e}")

    frame = _drop_trailing_blank_rows(frame)
    if frame.empty:
        raise EmptyInput(f"{path} contains no data")

    has_header = schema.has_header
    if has_header is None:
        has_header = not _is_numeric_row(frame.iloc[0].tolist())
    if has_header:
        frame = frame.iloc[1:]
    d = frame.shape[1]

    ragged = frame.isna().any(axis=1).to_numpy()
    if ragged.any():
        raise SchemaError(_line_number(int(np.argmax(ragged)), has_header), f"expected {d} fields")

    raw = frame.to_numpy(dtype=object)
    try:
        coords = raw.astype(np.float64)
    except ValueError:
        coords = None
    if coords is None or not np.all(np.isfinite(coords)):
        for position, row in enumerate(raw):
            for column, value in enumerate(row):
                try:
                    parsed = float(value)
                except ValueError:
                    parsed = math.nan
                if not math.isfinite(parsed):
                    raise ParseError(_line_number(position, has_header), column + 1, value)

    log.info("Loaded %d points with %d columns from %s", raw.shape[0], d, path)
    return Dataset(coords.reshape(raw.shape[0], d))


def write_dataset(dataset: Dataset, path, schema: CsvSchema = CsvSchema()):
    """Write points in index order with header x0..x{d-1} and round-trip float formatting."""
    ordered = dataset.by_index()
    columns = [f"x{axis}" for axis in range(ordered.d)]
    frame = pd.DataFrame([[repr(v) for v in row] for row in ordered.coords.tolist()], columns=columns)
    try:
        frame.to_csv(path, sep=schema.delimiter, header=schema.has_header is not False, index=False,
                     lineterminator="\n")
    except OSError as e:
        raise DataIoError(f"cannot write {path}: {e}")
    log.info("Wrote %d points to %s", ordered.n, path)


def write_labels(labeling: ClusterLabeling, path):
    """Write "index,cluster" rows in point-index order; NOISE is written as -1."""
    frame = pd.DataFrame({"index": np.arange(labeling.n, dtype=np.int64), "cluster": labeling.labels})
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise DataIoError(f"cannot write {path}: {e}")
    log.info("Wrote labels for %d points to %s", labeling.n, path)


def load_labels(path) -> ClusterLabeling:
    if not os.path.isfile(path):
        raise DataIoError(f"cannot read {path}: no such file")
    try:
        frame = pd.read_csv(path, dtype={"index": np.int64, "cluster": np.int64})
    except (ValueError, pd.errors.ParserError) as e:
        raise SchemaError(0, f"not a labels file: {e}")
    if list(frame.columns) != ["index", "cluster"]:
        raise SchemaError(1, f"expected header index,cluster (got {','.join(map(str, frame.columns))})")
    labels = frame.sort_values("index")["cluster"].to_numpy(dtype=np.int64)
    cluster_count = len(np.unique(labels[labels != NOISE]))
    return ClusterLabeling(labels, cluster_count)


def _lattice_centers(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    per_axis = 1
    while per_axis ** spec.d < spec.k:
        per_axis += 1
    sites = rng.choice(per_axis ** spec.d, size=spec.k, replace=False)
    digits = np.empty((spec.k, spec.d), dtype=np.int64)
    remaining = np.asarray(sites, dtype=np.int64)
    for axis in range(spec.d):
        digits[:, axis] = remaining % per_axis
        remaining = remaining // per_axis
    return digits.astype(np.float64) * spec.blob_separation


def generate(spec: GeneratorSpec) -> Dataset:
    """
    Build a deterministic synthetic dataset.

    - blobs: k Gaussian clusters (sigma = spread) centered on distinct sites
      of a lattice with spacing separation, so centers are >= 6 sigma apart
    - rings: concentric annuli around the origin, points split evenly (d = 2 only)
    - uniform: i.i.d. uniform points in [0, extent]^d
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed & 0xFFFFFFFFFFFFFFFF))

    if spec.kind == "blobs":
        centers = _lattice_centers(spec, rng)
        sizes = [len(part) for part in np.array_split(np.arange(spec.n), spec.k)]
        coords = np.vstack([
            rng.normal(loc=center, scale=spec.spread, size=(size, spec.d))
            for center, size in zip(centers, sizes)
        ])
    elif spec.kind == "rings":
        parts = []
        for radius, size in zip(spec.radii, [len(p) for p in np.array_split(np.arange(spec.n), len(spec.radii))]):
            angle = rng.uniform(0.0, 2.0 * np.pi, size)
            r = rng.uniform(radius - spec.thickness / 2.0, radius + spec.thickness / 2.0, size)
            parts.append(np.column_stack([r * np.cos(angle), r * np.sin(angle)]))
        coords = np.vstack(parts)
    else:
        coords = rng.uniform(0.0, spec.extent, size=(spec.n, spec.d))

    log.debug("Generated %s dataset: n=%d d=%d seed=%d", spec.kind, spec.n, spec.d, spec.seed)
    return Dataset(coords)


_INT_KEYS = ("n", "d", "seed", "k")
_FLOAT_KEYS = ("spread", "separation", "thickness", "extent")


def parse_generator_spec(text, n=None) -> GeneratorSpec:
    """
    Parse "kind:key=value,..." into a GeneratorSpec. `n` fills in the point
    count when the text leaves it out (bench sets it per size).

    Example: "blobs:n=10000,d=2,seed=7,k=3,spread=0.5" or "rings:n=2000,radii=1;3"
    """
    kind, _, rest = str(text).strip().partition(":")
    values = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise InvalidGeneratorSpec(f"expected key=value in generator spec, got {item!r}")
        if key not in _INT_KEYS + _FLOAT_KEYS + ("radii",):
            raise InvalidGeneratorSpec(f"unknown generator key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = tuple(float(v) for v in value.split(";") if v.strip())
        except ValueError:
            raise InvalidGeneratorSpec(f"bad value for {key}: {value!r}")
    if "n" not in values and n is not None:
        values["n"] = int(n)
    if "n" not in values:
        raise InvalidGeneratorSpec(f"generator spec {text!r} needs n")
    return GeneratorSpec(kind=kind.strip(), **values)
