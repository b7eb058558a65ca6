"""Shared fixtures and dataset builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from embrobust import EmbeddingDataset, SynthSpec, generate

# Five-class / five-center composition mirroring the evaluation table of the
# domain: rows = bio classes, cols = conf classes, 20 populated cells. The
# first two bio classes cover every conf class; the others have gaps.
SPARSE_CELLS = np.array([
    [1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1],
    [1, 0, 1, 1, 0],
    [1, 0, 1, 0, 1],
    [1, 1, 1, 1, 0],
])


def make_random_dataset(seed: int, n: int, dim: int, n_bio: int = 3,
                        n_conf: int = 4) -> EmbeddingDataset:
    """Unstructured dataset: standard normal vectors, random labels."""
    rng = np.random.default_rng(seed)
    vectors = rng.normal(size=(n, dim))
    bio = [f"b{v}" for v in rng.integers(n_bio, size=n)]
    conf = [f"c{v}" for v in rng.integers(n_conf, size=n)]
    ids = [f"s{i:04d}" for i in range(n)]
    return EmbeddingDataset.from_arrays(ids, vectors, bio, conf)


def make_synth(seed=0, n_bio=3, n_conf=3, per_cell=10, dim=24,
               bio_strength=1.0, conf_strength=1.0, noise_sigma=0.3):
    return generate(SynthSpec(
        n_bio=n_bio, n_conf=n_conf, per_cell=per_cell, dim=dim,
        bio_strength=bio_strength, conf_strength=conf_strength,
        noise_sigma=noise_sigma, seed=seed))


@pytest.fixture
def small_random_ds() -> EmbeddingDataset:
    return make_random_dataset(seed=11, n=40, dim=8)


@pytest.fixture
def table_shaped_ds() -> EmbeddingDataset:
    """200 samples over the sparse 20-cell composition, 10 per populated cell."""
    return generate(SynthSpec(
        n_bio=5, n_conf=5, per_cell=SPARSE_CELLS * 10, dim=32,
        bio_strength=1.0, conf_strength=0.8, noise_sigma=0.4, seed=42))
