import os

import numpy as np
import pytest

from hca_settings import Settings
from hca_types import Dataset


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    """Keep env files loaded by one test from leaking into the next."""
    clean = {k: v for k, v in os.environ.items() if not k.startswith("HCA_") and k != "OUTPUT_DIR"}
    monkeypatch.setattr(os, "environ", clean)
    clean["HCA_ENV_PATH"] = str(tmp_path / "missing.env")
    clean["OUTPUT_DIR"] = str(tmp_path / "output_folder")
    yield


@pytest.fixture
def settings(tmp_path):
    return Settings(output_dir=str(tmp_path / "output_folder"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_dataset(rng, n, d, low=-5.0, high=5.0):
    return Dataset(rng.uniform(low, high, size=(n, d)))


@pytest.fixture
def random_suite():
    """
    Yield (dataset, epsilon) pairs with mixed n, d and epsilon.

    Epsilon is scaled to the typical point spacing so that suites contain
    both fragmented and well-connected datasets.
    """
    def make(count, max_n=300, dims=(1, 2, 3, 4, 5), seed=7):
        gen = np.random.default_rng(seed)
        for _ in range(count):
            d = int(gen.choice(dims))
            n = int(gen.integers(1, max_n + 1))
            dataset = random_dataset(gen, n, d)
            spacing = 10.0 / max(n, 1) ** (1.0 / d)
            epsilon = float(spacing * gen.uniform(0.3, 2.5))
            yield dataset, epsilon
    return make


@pytest.fixture
def blobs_2d():
    """Three tight, well-separated 2-D Gaussian blobs (sigma = 1, 400 points each)."""
    from dataset_io import GeneratorSpec, generate
    return generate(GeneratorSpec(kind="blobs", n=1200, d=2, seed=11, k=3, spread=1.0))
