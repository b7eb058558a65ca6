"""Exact 2D t-SNE with perplexity calibration, plus projection diagnostics.

The projection is unsupervised: affinities come only from pairwise
distances in the embedding space (squared cosine distances, consistent with
the toolkit-wide metric). Exact O(n^2) gradients keep the implementation
small and make the finite-difference gradient check meaningful.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import EmbeddingDataset
from .evaluation import AnalysisError
from .neighbors import pairwise_distances

_EPS = 1e-12


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration_factor: float = 12.0
    early_exaggeration_iters: int = 250
    learning_rate: float = 200.0
    momentum_start: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "perplexity": self.perplexity,
            "iterations": self.iterations,
            "early_exaggeration_factor": self.early_exaggeration_factor,
            "early_exaggeration_iters": self.early_exaggeration_iters,
            "learning_rate": self.learning_rate,
            "momentum_start": self.momentum_start,
            "momentum_final": self.momentum_final,
            "momentum_switch_iter": self.momentum_switch_iter,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    coords: np.ndarray    # (n, 2)
    kl_trace: np.ndarray  # KL divergence (true affinities) per iteration
    config: TsneConfig


def perplexity_calibration(
    sq_dists_row: np.ndarray,
    target_perplexity: float,
    tol: float = 1e-4,
    max_iter: int = 64,
) -> tuple[float, np.ndarray]:
    """Find the Gaussian bandwidth whose conditional distribution has the
    requested perplexity.

    ``sq_dists_row`` holds squared distances to all other samples (self
    excluded). Returns (sigma, p_row) with p_row summing to 1. When the
    target is unreachable (degenerate rows, or target >= row length) the
    row falls back to uniform with a warning.
    """
    d = np.asarray(sq_dists_row, dtype=np.float64)
    m = d.size
    if m < 1:
        raise ValueError("empty distance row")
    uniform = np.full(m, 1.0 / m)
    if target_perplexity >= m or target_perplexity <= 0:
        warnings.warn(
            f"perplexity {target_perplexity} unreachable for row of {m} neighbors; "
            "using uniform affinities")
        return float("inf"), uniform

    def entropy_probs(beta: float) -> tuple[float, np.ndarray]:
        logits = -beta * (d - d.min())
        p = np.exp(logits)
        s = p.sum()
        if s <= 0:
            return 0.0, None
        p /= s
        nz = p > 0
        h = -(p[nz] * np.log2(p[nz])).sum()
        return float(h), p

    target_entropy = np.log2(target_perplexity)
    beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
    p = None
    for _ in range(max_iter):
        h, p = entropy_probs(beta)
        if p is None:
            break
        if abs(2.0 ** h - target_perplexity) <= tol:
            return float(np.sqrt(0.5 / beta)), p
        if h > target_entropy:  # too spread out: sharpen
            beta_lo = beta
            beta = beta * 2.0 if beta_hi == np.inf else 0.5 * (beta + beta_hi)
        else:
            beta_hi = beta
            beta = beta / 2.0 if beta_lo == 0.0 else 0.5 * (beta + beta_lo)
    if p is not None:
        h, p = entropy_probs(beta)
        if p is not None and abs(2.0 ** h - target_perplexity) <= tol:
            return float(np.sqrt(0.5 / beta)), p
    warnings.warn("perplexity calibration did not converge; using uniform affinities")
    return float("inf"), uniform


def joint_affinities(sq_dists: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized affinity matrix P from squared distances: non-negative,
    zero diagonal, sums to 1."""
    n = sq_dists.shape[0]
    cond = np.zeros((n, n))
    others = ~np.eye(n, dtype=bool)
    for i in range(n):
        _, p_row = perplexity_calibration(sq_dists[i][others[i]], perplexity)
        cond[i][others[i]] = p_row
    P = (cond + cond.T) / (2.0 * n)
    return P


def _student_t_kernel(Y: np.ndarray) -> np.ndarray:
    """Unnormalized heavy-tailed similarities 1/(1+d^2), zero diagonal."""
    sq = (Y * Y).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (Y @ Y.T)
    np.clip(d2, 0.0, None, out=d2)
    d2 += 1.0
    num = np.reciprocal(d2, out=d2)
    np.fill_diagonal(num, 0.0)
    return num


def _grad_from_kernel(P_eff: np.ndarray, Q: np.ndarray, num: np.ndarray,
                      Y: np.ndarray) -> np.ndarray:
    M = (P_eff - Q) * num
    return 4.0 * (M.sum(axis=1)[:, None] * Y - M @ Y)


def kl_divergence_and_grad(P: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    """KL(P || Q) under the Student-t low-dimensional kernel, with its gradient."""
    num = _student_t_kernel(Y)
    Q = num / num.sum()
    mask = P > 0
    kl = float((P[mask] * np.log(P[mask] / np.maximum(Q[mask], _EPS))).sum())
    return kl, _grad_from_kernel(P, Q, num, Y)


def tsne(ds: EmbeddingDataset | np.ndarray, cfg: TsneConfig = TsneConfig()) -> ProjectionResult:
    """Project to 2D by gradient descent on the Kullback-Leibler objective.

    Deterministic given the seed: initial coordinates are a small isotropic
    Gaussian cloud from a seeded generator. The kl_trace always records the
    divergence against the true (non-exaggerated) affinities.
    """
    vectors = ds.vectors if isinstance(ds, EmbeddingDataset) else np.asarray(ds, dtype=np.float64)
    n = vectors.shape[0]
    if n < 10:
        raise AnalysisError(f"t-SNE needs at least 10 samples, got {n}")
    if cfg.perplexity >= (n - 1) / 3:
        raise AnalysisError(
            f"perplexity {cfg.perplexity} too large for n={n}; needs < (n-1)/3")
    if cfg.iterations < cfg.early_exaggeration_iters:
        raise AnalysisError("iterations must cover the early exaggeration phase")

    d2 = pairwise_distances(vectors, metric="cosine") ** 2
    P = joint_affinities(d2, cfg.perplexity)

    rng = np.random.default_rng(cfg.seed)
    Y = 1e-4 * rng.standard_normal((n, 2))
    velocity = np.zeros_like(Y)
    kl_trace = np.empty(cfg.iterations)
    nz = np.flatnonzero(P.ravel() > 0)
    p_nz = P.ravel().take(nz)
    entropy_term = float((p_nz * np.log(p_nz)).sum())
    P_exag = P * cfg.early_exaggeration_factor
    for it in range(cfg.iterations):
        exaggerate = it < cfg.early_exaggeration_iters
        num = _student_t_kernel(Y)
        Q = num / num.sum()
        # trace is always against the true affinities, also while exaggerating
        q_nz = np.maximum(Q.ravel().take(nz), _EPS)
        kl_true = entropy_term - float((p_nz * np.log(q_nz)).sum())
        if not np.isfinite(kl_true):
            raise AnalysisError(f"non-finite divergence at iteration {it}")
        kl_trace[it] = kl_true
        grad = _grad_from_kernel(P_exag if exaggerate else P, Q, num, Y)
        momentum = (cfg.momentum_start if it < cfg.momentum_switch_iter
                    else cfg.momentum_final)
        velocity = momentum * velocity - cfg.learning_rate * grad
        Y = Y + velocity
        Y -= Y.mean(axis=0)

    Y.flags.writeable = False
    kl_trace.flags.writeable = False
    return ProjectionResult(coords=Y, kl_trace=kl_trace, config=cfg)


def trustworthiness(
    ds: EmbeddingDataset | np.ndarray,
    coords: np.ndarray,
    k: int = 12,
    high_metric: str = "euclidean",
) -> float:
    """Rank-based projection fidelity in [0, 1].

    Penalizes points that are k-nearest neighbors in the projection but not
    in the original space, weighted by how far down the original ranking
    they sit. Both spaces are ranked under Euclidean distance by default so
    the score is invariant to rigid motions of the coordinates; the
    original-space metric can be switched to cosine.
    """
    X = ds.vectors if isinstance(ds, EmbeddingDataset) else np.asarray(ds, dtype=np.float64)
    coords = np.asarray(coords, dtype=np.float64)
    n = X.shape[0]
    if coords.shape[0] != n:
        raise ValueError("coords row count differs from dataset")
    if not 1 <= k < n / 2:
        raise ValueError(f"k must satisfy 1 <= k < n/2, got k={k}, n={n}")

    dh = pairwise_distances(X, metric=high_metric)
    dl = pairwise_distances(coords, metric="euclidean")
    np.fill_diagonal(dh, np.inf)
    np.fill_diagonal(dl, np.inf)
    order_high = np.argsort(dh, axis=1, kind="stable")[:, : n - 1]
    order_low = np.argsort(dl, axis=1, kind="stable")[:, :k]

    rank_high = np.empty((n, n), dtype=np.int64)
    rows = np.arange(n)[:, None]
    rank_high[rows, order_high] = np.arange(1, n)[None, :]

    ranks_of_low = rank_high[rows, order_low]
    penalty = np.maximum(ranks_of_low - k, 0).sum()
    return float(1.0 - 2.0 * penalty / (n * k * (2.0 * n - 3.0 * k - 1.0)))
