"""Exact neighbor rankings under cosine distance and per-rank label-agreement curves.

The neighbor table is the full sorted ranking of every sample's n-1
cross-distances. Brute force is deliberate: at desk scale (n around 2000)
exact ranks are affordable and the downstream statistics are defined on
exact neighbor sets, not approximations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import EmbeddingDataset


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """Per-sample ranking of all other samples by ascending distance.

    ``order[i, j]`` is the index of the (j+1)-th nearest neighbor of sample
    i (self excluded); ``dist[i, j]`` the corresponding distance. Distance
    ties are broken by ascending sample index.

    ``limit[i]`` counts the usable leading entries of row i. Without group
    exclusion this is n-1 everywhere; with it, same-group neighbors are
    moved behind the usable prefix and ``limit`` shrinks accordingly.
    """

    order: np.ndarray  # (n, n-1) intp
    dist: np.ndarray   # (n, n-1) float64
    limit: np.ndarray  # (n,) intp
    metric: str = "cosine"
    exclude_same_group: bool = False

    @property
    def n(self) -> int:
        return self.order.shape[0]

    @property
    def max_rank(self) -> int:
        """Largest rank k valid for every sample."""
        return int(self.limit.min())


@dataclass(frozen=True, eq=False)
class FrequencyCurves:
    """Fraction of samples whose j-th neighbor shares the label, j = 1..len."""

    f_bio: np.ndarray
    f_conf: np.ndarray

    @property
    def ranks(self) -> np.ndarray:
        return np.arange(1, len(self.f_bio) + 1)


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cos(u, v), clamped to [0, 2]. Raises on zero-norm input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    nu = np.sqrt((u * u).sum())
    nv = np.sqrt((v * v).sum())
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine distance undefined for zero-norm vector")
    d = 1.0 - (u * v).sum() / (nu * nv)
    return float(min(max(d, 0.0), 2.0))


def pairwise_distances(vectors: np.ndarray, metric: str = "cosine") -> np.ndarray:
    """Dense symmetric distance matrix with an exact-zero diagonal."""
    v = np.asarray(vectors, dtype=np.float64)
    if metric == "cosine":
        norms = np.sqrt((v * v).sum(axis=1))
        if (norms == 0.0).any():
            bad = int(np.nonzero(norms == 0.0)[0][0])
            raise ValueError(f"zero-norm vector at row {bad}")
        unit = v / norms[:, None]
        d = 1.0 - unit @ unit.T
        np.clip(d, 0.0, 2.0, out=d)
    elif metric == "euclidean":
        sq = (v * v).sum(axis=1)
        d = sq[:, None] + sq[None, :] - 2.0 * (v @ v.T)
        np.clip(d, 0.0, None, out=d)
        np.sqrt(d, out=d)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    np.fill_diagonal(d, 0.0)
    return d


def build_neighbor_table(
    ds: EmbeddingDataset,
    metric: str = "cosine",
    exclude_same_group: bool = False,
) -> NeighborTable:
    """Full exact sort of all cross-distances per sample.

    With ``exclude_same_group``, neighbors sharing a non-empty group id with
    the query sample are stably moved behind the usable prefix of each row;
    their distances are kept so the row remains a permutation of the other
    indices, partitioned into allowed-then-excluded.
    """
    n = ds.n
    d = pairwise_distances(ds.vectors, metric=metric)
    np.fill_diagonal(d, np.inf)
    # stable argsort implements the ascending-index tie rule
    order = np.argsort(d, axis=1, kind="stable")[:, : n - 1]
    dist = np.take_along_axis(d, order, axis=1)
    limit = np.full(n, n - 1, dtype=np.intp)

    if exclude_same_group:
        groups = np.array(ds.group_ids, dtype=object)
        grouped = groups != ""
        excluded = (groups[order] == groups[:, None]) & grouped[:, None] & grouped[order]
        part = np.argsort(excluded, axis=1, kind="stable")
        order = np.take_along_axis(order, part, axis=1)
        dist = np.take_along_axis(dist, part, axis=1)
        limit = (n - 1) - excluded.sum(axis=1)

    for arr in (order, dist, limit):
        arr.flags.writeable = False
    return NeighborTable(order, dist, limit, metric, exclude_same_group)


def frequency_curves(ds: EmbeddingDataset, nt: NeighborTable) -> FrequencyCurves:
    """Per-rank same-label fractions over ranks 1..nt.max_rank."""
    depth = nt.max_rank
    neigh = nt.order[:, :depth]
    f_bio = (ds.bio_codes[neigh] == ds.bio_codes[:, None]).mean(axis=0)
    f_conf = (ds.conf_codes[neigh] == ds.conf_codes[:, None]).mean(axis=0)
    f_bio.flags.writeable = False
    f_conf.flags.writeable = False
    return FrequencyCurves(f_bio, f_conf)


def write_frequency_csv(curves: FrequencyCurves, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["j", "f_bio", "f_conf"])
        for j, fb, fc in zip(curves.ranks, curves.f_bio, curves.f_conf):
            writer.writerow([int(j), repr(float(fb)), repr(float(fc))])
