import numpy as np
import pytest

from dataset_io import (CsvSchema, GeneratorSpec, generate, load_csv, load_labels, parse_generator_spec,
                        write_dataset, write_labels)
from hca_errors import DataIoError, EmptyInput, InvalidGeneratorSpec, ParseError, SchemaError, UnsupportedDimension
from hca_types import NOISE, ClusterLabeling, Dataset
from oracle_dbscan import connectivity_components


def write_text(tmp_path, text, name="points.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# --- load_csv ---

def test_load_csv_without_header(tmp_path):
    dataset = load_csv(write_text(tmp_path, "1.0,2.0\n3.0,4.0\n"), CsvSchema(has_header=False))
    assert dataset.n == 2
    assert dataset.d == 2
    assert dataset.coords.tolist() == [[1.0, 2.0], [3.0, 4.0]]
    assert dataset.index.tolist() == [0, 1]


def test_load_csv_skips_header(tmp_path):
    dataset = load_csv(write_text(tmp_path, "x,y\n1.5,-2\n0,1e3\n"))
    assert dataset.coords.tolist() == [[1.5, -2.0], [0.0, 1000.0]]


def test_load_csv_default_schema_keeps_numeric_first_row(tmp_path):
    dataset = load_csv(write_text(tmp_path, "1.0,2.0\n3.0,4.0\n"))
    assert dataset.n == 2
    assert dataset.coords.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_load_csv_explicit_header_flag_always_skips_row_one(tmp_path):
    dataset = load_csv(write_text(tmp_path, "1.0,2.0\n3.0,4.0\n"), CsvSchema(has_header=True))
    assert dataset.coords.tolist() == [[3.0, 4.0]]


@pytest.mark.parametrize("tail", ["\n", "\n\n", "\n  \n"])
def test_load_csv_ignores_trailing_blank_lines(tmp_path, tail):
    dataset = load_csv(write_text(tmp_path, "1.0,2.0\n3.0,4.0\n" + tail))
    assert dataset.coords.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_load_csv_blank_line_between_rows_is_an_error(tmp_path):
    path = write_text(tmp_path, "1.0,2.0\n\n3.0,4.0\n")
    with pytest.raises((SchemaError, ParseError)) as info:
        load_csv(path, CsvSchema(has_header=False))
    assert info.value.row == 2


def test_load_csv_custom_delimiter(tmp_path):
    dataset = load_csv(write_text(tmp_path, "0.5;1;2\n3;4;5\n"), CsvSchema(has_header=False, delimiter=";"))
    assert dataset.d == 3
    assert dataset.coords[1].tolist() == [3.0, 4.0, 5.0]


def test_load_csv_one_dimensional(tmp_path):
    dataset = load_csv(write_text(tmp_path, "x\n1\n2\n3\n"))
    assert dataset.coords.shape == (3, 1)


def test_load_csv_row_with_extra_field_is_schema_error(tmp_path):
    path = write_text(tmp_path, "1.0,2.0\n3.0,4.0\n5.0,6.0,7.0\n")
    with pytest.raises(SchemaError) as info:
        load_csv(path, CsvSchema(has_header=False))
    assert info.value.row == 3


def test_load_csv_non_numeric_field_is_parse_error(tmp_path):
    path = write_text(tmp_path, "x,y\n1.0,2.0\n3.0,abc\n")
    with pytest.raises(ParseError) as info:
        load_csv(path)
    assert info.value.row == 3
    assert info.value.column == 2
    assert "abc" in str(info.value)


def test_load_csv_rejects_non_finite_values(tmp_path):
    path = write_text(tmp_path, "1.0,inf\n", name="inf.csv")
    with pytest.raises(ParseError) as info:
        load_csv(path, CsvSchema(has_header=False))
    assert (info.value.row, info.value.column) == (1, 2)


def test_load_csv_missing_file_is_io_error(tmp_path):
    with pytest.raises(DataIoError):
        load_csv(str(tmp_path / "absent.csv"))


def test_load_csv_empty_file(tmp_path):
    with pytest.raises(EmptyInput):
        load_csv(write_text(tmp_path, ""))


def test_csv_schema_rejects_long_delimiter():
    with pytest.raises(ValueError):
        CsvSchema(delimiter="::")


# --- write_dataset ---

def test_write_then_load_reproduces_coordinates_exactly(tmp_path, rng):
    coords = rng.normal(scale=1e3, size=(200, 3))
    coords[0] = [0.1, 1 / 3, -2.5e-300]
    path = str(tmp_path / "round.csv")
    write_dataset(Dataset(coords), path)
    loaded = load_csv(path)
    assert np.array_equal(loaded.coords, coords)


def test_write_dataset_header_and_index_order(tmp_path):
    dataset = Dataset(np.array([[3.0, 4.0], [1.0, 2.0]]), index=np.array([1, 0]))
    path = tmp_path / "ordered.csv"
    write_dataset(dataset, str(path))
    assert path.read_text() == "x0,x1\n1.0,2.0\n3.0,4.0\n"


def test_write_dataset_to_missing_directory_is_io_error(tmp_path):
    with pytest.raises(DataIoError):
        write_dataset(Dataset(np.zeros((1, 2))), str(tmp_path / "nope" / "out.csv"))


# --- labels ---

def test_write_labels_format(tmp_path):
    path = tmp_path / "labels.csv"
    write_labels(ClusterLabeling(np.array([1, 1, NOISE]), 1), str(path))
    assert path.read_text() == "index,cluster\n0,1\n1,1\n2,-1\n"


def test_write_labels_for_empty_labeling_is_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_labels(ClusterLabeling(np.array([], dtype=np.int64), 0), str(path))
    assert path.read_text() == "index,cluster\n"


def test_labels_round_trip(tmp_path):
    labeling = ClusterLabeling(np.array([2, 1, NOISE, 2, 3]), 3)
    path = str(tmp_path / "labels.csv")
    write_labels(labeling, path)
    loaded = load_labels(path)
    assert loaded.labels.tolist() == [2, 1, NOISE, 2, 3]
    assert loaded.cluster_count == 3


def test_load_labels_rejects_other_files(tmp_path):
    with pytest.raises(SchemaError):
        load_labels(write_text(tmp_path, "a,b\n1,2\n", name="other.csv"))
    with pytest.raises(DataIoError):
        load_labels(str(tmp_path / "absent.csv"))


# --- generate ---

@pytest.mark.parametrize("kind", ["blobs", "rings", "uniform"])
def test_generate_is_deterministic(kind):
    spec = GeneratorSpec(kind=kind, n=500, seed=42)
    first = generate(spec)
    second = generate(spec)
    assert first.coords.shape == (500, 2)
    assert np.array_equal(first.coords, second.coords)
    assert not np.array_equal(first.coords, generate(GeneratorSpec(kind=kind, n=500, seed=43)).coords)


def test_blobs_are_well_separated():
    spec = GeneratorSpec(kind="blobs", n=900, d=2, seed=5, k=3, spread=1.0)
    dataset = generate(spec)
    means = np.array([dataset.coords[i * 300:(i + 1) * 300].mean(axis=0) for i in range(3)])
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.linalg.norm(means[i] - means[j]) >= 6.0
    assert connectivity_components(dataset, 4.0).cluster_count == 3


def test_blobs_in_higher_dimensions_use_distinct_sites():
    dataset = generate(GeneratorSpec(kind="blobs", n=400, d=5, seed=1, k=4, spread=0.5))
    assert dataset.coords.shape == (400, 5)
    means = np.round(np.array([dataset.coords[i * 100:(i + 1) * 100].mean(axis=0) for i in range(4)]) / 8.0)
    assert len({tuple(row) for row in means.tolist()}) == 4


def test_rings_lie_in_their_annuli():
    dataset = generate(GeneratorSpec(kind="rings", n=1000, seed=3))
    radius = np.linalg.norm(dataset.coords, axis=1)
    assert np.all(np.abs(radius[:500] - 1.0) <= 0.1 + 1e-12)
    assert np.all(np.abs(radius[500:] - 3.0) <= 0.1 + 1e-12)
    assert connectivity_components(dataset, 0.5).cluster_count == 2


def test_uniform_stays_in_box():
    dataset = generate(GeneratorSpec(kind="uniform", n=1000, d=3, seed=9, extent=4.0))
    assert dataset.coords.min() >= 0.0
    assert dataset.coords.max() <= 4.0


def test_generator_spec_validation():
    with pytest.raises(UnsupportedDimension):
        GeneratorSpec(kind="rings", n=10, d=3)
    with pytest.raises(InvalidGeneratorSpec):
        GeneratorSpec(kind="moons", n=10)
    with pytest.raises(InvalidGeneratorSpec):
        GeneratorSpec(kind="blobs", n=0)
    with pytest.raises(InvalidGeneratorSpec):
        GeneratorSpec(kind="blobs", n=10, spread=1.0, separation=5.0)
    assert GeneratorSpec(kind="blobs", n=10, spread=0.5).blob_separation == 8.0


# --- parse_generator_spec ---

def test_parse_generator_spec():
    spec = parse_generator_spec("blobs:n=10000,d=2,seed=7,k=3,spread=0.5")
    assert spec == GeneratorSpec(kind="blobs", n=10000, d=2, seed=7, k=3, spread=0.5)
    rings = parse_generator_spec("rings:n=2000,radii=1;3;5,thickness=0.1")
    assert rings.radii == (1.0, 3.0, 5.0)
    assert rings.thickness == 0.1


def test_parse_generator_spec_fills_in_default_n():
    spec = parse_generator_spec("uniform:d=2,seed=1,extent=100", n=250)
    assert (spec.n, spec.d, spec.extent) == (250, 2, 100.0)
    assert parse_generator_spec("uniform:n=10", n=250).n == 10


@pytest.mark.parametrize("text", [
    "blobs:d=2",
    "blobs:n=ten",
    "blobs:n=10,colour=red",
    "blobs:n=10,k",
    "spirals:n=10",
])
def test_parse_generator_spec_rejects_bad_text(text):
    with pytest.raises(InvalidGeneratorSpec):
        parse_generator_spec(text)
