"""Neighbor table exactness, tie handling, and frequency curves."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from embrobust import (EmbeddingDataset, SynthSpec, build_neighbor_table,
                       cosine_distance, frequency_curves, generate)

from conftest import make_random_dataset


def oracle_table(vectors: np.ndarray):
    """Independent quadratic recomputation: own normalization expressions,
    lexsort instead of stable argsort, explicit per-row bookkeeping."""
    v = np.asarray(vectors, dtype=np.float64)
    n = v.shape[0]
    unit = v / np.sqrt(np.square(v).sum(axis=1))[:, None]
    gram = unit @ unit.T
    dmat = np.clip(1.0 - gram, 0.0, 2.0)
    order = np.empty((n, n - 1), dtype=np.intp)
    dist = np.empty((n, n - 1))
    for i in range(n):
        others = [j for j in range(n) if j != i]
        # lexsort: last key is primary
        keys = np.lexsort((np.array(others), dmat[i, others]))
        ranked = [others[t] for t in keys]
        order[i] = ranked
        dist[i] = dmat[i, ranked]
    return order, dist


def test_cosine_distance_trivial_cases():
    assert cosine_distance(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0])) == 0.0
    assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0
    assert cosine_distance(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == 2.0
    with pytest.raises(ValueError, match="zero-norm"):
        cosine_distance(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError, match="shape mismatch"):
        cosine_distance(np.ones(3), np.ones(4))


def test_three_points_on_known_angles():
    angles = {"A": 0.0, "B": np.radians(10.0), "C": np.radians(90.0)}
    vectors = np.array([[np.cos(a), np.sin(a)] for a in angles.values()])
    ds = EmbeddingDataset.from_arrays(list(angles), vectors, ["t"] * 3, ["c"] * 3)
    nt = build_neighbor_table(ds)
    assert nt.order[0].tolist() == [1, 2]  # A: B then C
    assert nt.order[2].tolist() == [1, 0]  # C: B (80 deg) then A (90 deg)


def test_matches_independent_recomputation():
    ds = make_random_dataset(seed=21, n=50, dim=8)
    nt = build_neighbor_table(ds)
    order, dist = oracle_table(ds.vectors)
    np.testing.assert_array_equal(nt.order, order)
    np.testing.assert_array_equal(nt.dist, dist)


def test_matches_oracle_at_larger_sizes():
    for seed, n, d in [(1, 120, 5), (2, 200, 16)]:
        ds = make_random_dataset(seed=seed, n=n, dim=d)
        nt = build_neighbor_table(ds)
        order, dist = oracle_table(ds.vectors)
        np.testing.assert_array_equal(nt.order, order)
        np.testing.assert_array_equal(nt.dist, dist)


def test_duplicate_vectors_tie_break_by_index():
    vectors = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
    ds = EmbeddingDataset.from_arrays(list("abcd"), vectors, ["t"] * 4, ["c"] * 4)
    nt = build_neighbor_table(ds)
    # sample 3 is at distance 0 from samples 0 and 2: lower index first
    assert nt.order[3].tolist() == [0, 2, 1]
    assert nt.order[0].tolist() == [2, 3, 1]


def test_rows_are_permutations_and_sorted(small_random_ds):
    nt = build_neighbor_table(small_random_ds)
    n = small_random_ds.n
    for i in range(n):
        assert sorted(nt.order[i].tolist()) == [j for j in range(n) if j != i]
        assert (np.diff(nt.dist[i]) >= 0).all()
    assert nt.dist.min() >= 0.0 and nt.dist.max() <= 2.0
    assert nt.max_rank == n - 1


def test_power_of_two_scaling_bit_identical(small_random_ds):
    ds = small_random_ds
    nt = build_neighbor_table(ds)
    for scale in (0.5, 2.0, 1024.0):
        scaled = EmbeddingDataset.from_arrays(
            ds.ids, ds.vectors * scale, ds.bio_labels, ds.conf_labels)
        nt2 = build_neighbor_table(scaled)
        np.testing.assert_array_equal(nt2.order, nt.order)
        np.testing.assert_array_equal(nt2.dist, nt.dist)


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(min_value=1e-3, max_value=1e3,
                       allow_nan=False, allow_infinity=False))
def test_positive_scaling_preserves_ranking(scale):
    ds = make_random_dataset(seed=77, n=25, dim=6)
    nt = build_neighbor_table(ds)
    scaled = EmbeddingDataset.from_arrays(
        ds.ids, ds.vectors * scale, ds.bio_labels, ds.conf_labels)
    nt2 = build_neighbor_table(scaled)
    np.testing.assert_array_equal(nt2.order, nt.order)
    np.testing.assert_allclose(nt2.dist, nt.dist, atol=1e-12)


def test_table_distances_match_scalar_function(small_random_ds):
    ds = small_random_ds
    nt = build_neighbor_table(ds)
    for i in (0, 7, 23):
        for j_rank in (0, 5, 30):
            j = nt.order[i, j_rank]
            expected = cosine_distance(ds.vectors[i], ds.vectors[j])
            assert nt.dist[i, j_rank] == pytest.approx(expected, abs=1e-12)


def test_euclidean_metric_option():
    vectors = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0], [1.0, 0.0]])
    ds = EmbeddingDataset.from_arrays(
        list("abcd"), vectors, ["t"] * 4, ["c"] * 4, require_nonzero=False)
    nt = build_neighbor_table(ds, metric="euclidean")
    assert nt.order[0].tolist() == [3, 1, 2]
    assert nt.dist[0].tolist() == [1.0, 3.0, 4.0]


def test_frequency_curve_single_bio_class():
    ds = make_random_dataset(seed=3, n=30, dim=5, n_bio=1, n_conf=3)
    nt = build_neighbor_table(ds)
    curves = frequency_curves(ds, nt)
    assert (curves.f_bio == 1.0).all()
    assert len(curves.f_bio) == 29
    assert curves.ranks[0] == 1 and curves.ranks[-1] == 29


def test_frequency_curve_tight_conf_clusters():
    # 5 tight clusters of 20, cluster = conf class, single bio class
    ds = generate(SynthSpec(n_bio=1, n_conf=5, per_cell=20, dim=16,
                            bio_strength=0.0, conf_strength=1.0,
                            noise_sigma=0.01, seed=8))
    nt = build_neighbor_table(ds)
    curves = frequency_curves(ds, nt)
    assert (curves.f_conf[:19] == 1.0).all()
    assert (curves.f_conf[19:] == 0.0).all()
    # independent recount of a few ranks straight from the table
    for j in (0, 10, 19, 40):
        same = sum(ds.conf_labels[nt.order[i, j]] == ds.conf_labels[i]
                   for i in range(ds.n))
        assert curves.f_conf[j] == pytest.approx(same / ds.n, abs=1e-12)


def test_cluster_conf_above_bio_curve():
    # conf signal dominant: confounder curve must sit above the bio curve early
    ds = generate(SynthSpec(n_bio=4, n_conf=4, per_cell=15, dim=24,
                            bio_strength=0.3, conf_strength=1.0,
                            noise_sigma=0.3, seed=12))
    nt = build_neighbor_table(ds)
    curves = frequency_curves(ds, nt)
    assert curves.f_conf[:10].mean() > curves.f_bio[:10].mean()


def test_exclude_same_group():
    rng = np.random.default_rng(4)
    vectors = rng.normal(size=(12, 6))
    groups = ["g1"] * 4 + ["g2"] * 4 + ["", "", "", ""]
    ds = EmbeddingDataset.from_arrays(
        [f"s{i}" for i in range(12)], vectors, ["t"] * 12, ["c"] * 12, groups)
    nt = build_neighbor_table(ds, exclude_same_group=True)
    for i in range(12):
        row = nt.order[i].tolist()
        assert sorted(row) == [j for j in range(12) if j != i]
        allowed = row[: nt.limit[i]]
        if groups[i]:
            assert all(groups[j] != groups[i] for j in allowed)
            assert nt.limit[i] == 12 - 1 - 3  # three same-group others
        else:
            assert nt.limit[i] == 11  # ungrouped samples exclude nothing
        # each partition stays distance-sorted
        assert (np.diff(nt.dist[i][: nt.limit[i]]) >= 0).all()
        assert (np.diff(nt.dist[i][nt.limit[i]:]) >= 0).all()
    assert nt.max_rank == 8
