"""Cross-validated probes and confounder attribution.

Implements the downstream analyses: stratified fold assignment, kNN and
multinomial logistic regression validation predictions on either label
axis, the same-center-confounder fractions for misclassified samples, and
the relation between center-related kNN errors and regression errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import EmbeddingDataset, class_count_matrix
from .neighbors import NeighborTable

# 9 log-spaced neighbor counts from 1 to 250
DEFAULT_K_GRID = (1, 2, 4, 8, 16, 32, 63, 125, 250)
DEFAULT_LAMBDA = 1e-3
DEFAULT_REPS = 5


class AnalysisError(ValueError):
    """An analysis precondition does not hold for the given data."""


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    fold_of: np.ndarray  # (n,) intp in [0, n_folds)
    n_folds: int
    seed: int


@dataclass(frozen=True, eq=False)
class EvalResult:
    """Validation predictions of one probe configuration.

    Every sample is predicted exactly once, by the model trained on the
    folds not containing it.
    """

    target: str                    # "bio" | "conf"
    method: str                    # "knn" | "logreg"
    k: int | None
    accuracy_mean: float
    accuracy_std: float
    fold_accuracy: tuple[float, ...]
    predictions: tuple[str, ...]
    correct: np.ndarray            # (n,) bool


@dataclass(frozen=True, eq=False)
class ConfounderReport:
    """Same-center fractions of confounding neighbors, per neighbor count k.

    ``frac_same_center[k]`` averages, over repetitions and misclassified
    samples, the fraction of the neighbors that voted for the wrong class
    which share the sample's confounder label. NaN marks grid points where
    no sample was misclassified. Accuracy curves are computed on the same
    (restricted) dataset as the fractions.
    """

    k_grid: tuple[int, ...]
    reps: int
    seeds: tuple[int, ...]
    frac_same_center: np.ndarray
    acc_bio: np.ndarray
    acc_conf: np.ndarray
    chance_level: float
    n_misclassified: np.ndarray
    bio_classes: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class CenterErrorRelation:
    """Per-sample center-related kNN error rates vs regression errors.

    A kNN run is one (repetition seed, k) pair; a run makes a center-related
    error on a sample iff it misclassifies it and strictly more than half of
    the k training neighbors simultaneously carry a wrong label and the
    sample's confounder label.
    """

    fraction_center_error: np.ndarray  # (n,) fraction of runs, in [0, 1]
    logreg_wrong: np.ndarray           # (n,) bool
    bin_edges: np.ndarray              # (11,)
    bin_counts: np.ndarray             # (10,)
    bin_logreg_error: np.ndarray       # (10,) NaN for empty bins
    k_grid: tuple[int, ...]
    reps: int
    seeds: tuple[int, ...]
    lam: float


def assign_folds(ds: EmbeddingDataset, n_folds: int = 5, seed: int = 0) -> FoldAssignment:
    """Stratified fold assignment: each (bio, conf) cell is dealt round-robin.

    Cell members are shuffled and dealt starting from a random fold, so cell
    counts per fold differ by at most 1. Deterministic given the seed.
    """
    if n_folds < 2:
        raise AnalysisError(f"need at least 2 folds, got {n_folds}")
    if n_folds > ds.n:
        raise AnalysisError(f"{n_folds} folds exceed {ds.n} samples")
    rng = np.random.default_rng(seed)
    cell_key = ds.bio_codes * len(ds.conf_classes) + ds.conf_codes
    fold_of = np.empty(ds.n, dtype=np.intp)
    for cell in np.unique(cell_key):
        members = np.nonzero(cell_key == cell)[0]
        rng.shuffle(members)
        start = int(rng.integers(n_folds))
        fold_of[members] = (start + np.arange(len(members))) % n_folds
    fold_of.flags.writeable = False
    return FoldAssignment(fold_of, n_folds, seed)


def _target_codes(ds: EmbeddingDataset, target: str) -> tuple[np.ndarray, tuple[str, ...]]:
    if target == "bio":
        return ds.bio_codes, ds.bio_classes
    if target == "conf":
        return ds.conf_codes, ds.conf_classes
    raise ValueError(f"target must be 'bio' or 'conf', got {target!r}")


def _training_neighbor_prefix(nt: NeighborTable, folds: FoldAssignment, depth: int) -> np.ndarray:
    """(n, depth) indices of each sample's nearest training-fold neighbors.

    Row i holds the ``depth`` nearest neighbors of i among samples outside
    i's own fold, in rank order. Raises if any sample has too few.
    """
    n = nt.n
    if depth < 1:
        raise AnalysisError(f"k must be >= 1, got {depth}")
    out = np.empty((n, depth), dtype=np.intp)
    cols = np.arange(n - 1)
    for f in range(folds.n_folds):
        rows = np.nonzero(folds.fold_of == f)[0]
        if len(rows) == 0:
            continue
        training = folds.fold_of != f
        sub = nt.order[rows]
        ok = training[sub] & (cols[None, :] < nt.limit[rows][:, None])
        avail = ok.sum(axis=1)
        if avail.min() < depth:
            raise AnalysisError(
                f"k={depth} exceeds training-fold size ({int(avail.min())} "
                f"training neighbors available for some sample in fold {f})")
        sel = np.argsort(~ok, axis=1, kind="stable")[:, :depth]
        out[rows] = np.take_along_axis(sub, sel, axis=1)
    return out


def _vote(neighbor_codes: np.ndarray, k: int, n_classes: int) -> np.ndarray:
    """Majority label among the first k columns; ties go to the class of the
    nearest neighbor holding a tied class."""
    lab = neighbor_codes[:, :k]
    onehot = lab[:, :, None] == np.arange(n_classes)[None, None, :]
    counts = onehot.sum(axis=1)
    first = np.where(onehot.any(axis=1), onehot.argmax(axis=1), k)
    best = counts.max(axis=1)
    tie_key = np.where(counts == best[:, None], first, k + 1)
    return tie_key.argmin(axis=1)


def _fold_accuracy(correct: np.ndarray, folds: FoldAssignment) -> tuple[float, ...]:
    accs = []
    for f in range(folds.n_folds):
        rows = folds.fold_of == f
        if rows.any():
            accs.append(float(correct[rows].mean()))
    return tuple(accs)


def _make_result(ds, target, method, k, pred_codes, classes, folds) -> EvalResult:
    true_codes, _ = _target_codes(ds, target)
    correct = pred_codes == true_codes
    fold_acc = _fold_accuracy(correct, folds)
    correct.flags.writeable = False
    return EvalResult(
        target=target, method=method, k=k,
        accuracy_mean=float(np.mean(fold_acc)),
        accuracy_std=float(np.std(fold_acc)),
        fold_accuracy=fold_acc,
        predictions=tuple(classes[c] for c in pred_codes),
        correct=correct)


def knn_predict(ds: EmbeddingDataset, nt: NeighborTable, folds: FoldAssignment,
                target: str, k: int = 3) -> EvalResult:
    """Cross-validated kNN probe: majority label of the k nearest training samples."""
    codes, classes = _target_codes(ds, target)
    prefix = _training_neighbor_prefix(nt, folds, k)
    pred = _vote(codes[prefix], k, len(classes))
    return _make_result(ds, target, "knn", k, pred, classes, folds)


# ---------------------------------------------------------------------------
# multinomial logistic regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LogRegModel:
    classes: tuple[str, ...]
    mean: np.ndarray       # (d,) standardization offsets from the training data
    inv_scale: np.ndarray  # (d,) 1/std, 0 for constant features
    weights: np.ndarray    # (d, C)
    bias: np.ndarray       # (C,)
    loss_trace: np.ndarray
    n_iter: int
    converged: bool


def softmax_loss_grad(Xs: np.ndarray, y: np.ndarray, W: np.ndarray, b: np.ndarray,
                      lam: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy of the softmax model plus lam/2 * ||W||^2.

    Returns (loss, grad_W, grad_b). The bias is unpenalized.
    """
    n = Xs.shape[0]
    logits = Xs @ W + b
    logits -= logits.max(axis=1, keepdims=True)
    expl = np.exp(logits)
    Z = expl.sum(axis=1)
    logp = logits - np.log(Z)[:, None]
    loss = -logp[np.arange(n), y].mean() + 0.5 * lam * float((W * W).sum())
    P = expl / Z[:, None]
    P[np.arange(n), y] -= 1.0
    grad_W = Xs.T @ P / n + lam * W
    grad_b = P.mean(axis=0)
    return float(loss), grad_W, grad_b


def logreg_fit(X: np.ndarray, y: Sequence, lam: float = DEFAULT_LAMBDA, seed: int = 0,
               max_iter: int = 5000, grad_tol: float = 1e-6) -> LogRegModel:
    """Fit a multinomial softmax model by full-batch gradient descent.

    Features are standardized internally (constant features zeroed out);
    optimization starts from zero weights and backtracks on the step size
    until the Armijo condition holds, so the objective never increases.
    ``seed`` is accepted for interface stability; the zero-initialized
    full-batch optimizer is deterministic.
    """
    del seed
    X = np.asarray(X, dtype=np.float64)
    if not np.isfinite(X).all():
        raise AnalysisError("non-finite feature value")
    labels = [str(v) for v in y]
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise AnalysisError("logistic regression needs at least 2 classes")
    index = {c: i for i, c in enumerate(classes)}
    yc = np.array([index[v] for v in labels], dtype=np.intp)

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    inv_scale = np.where(std > 0.0, 1.0 / np.where(std > 0.0, std, 1.0), 0.0)
    Xs = (X - mean) * inv_scale

    d, C = X.shape[1], len(classes)
    W = np.zeros((d, C))
    b = np.zeros(C)
    loss, gW, gb = softmax_loss_grad(Xs, yc, W, b, lam)
    trace = [loss]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = max(np.abs(gW).max(), np.abs(gb).max())
        if gnorm < grad_tol:
            converged = True
            it -= 1
            break
        g2 = float((gW * gW).sum() + (gb * gb).sum())
        step = min(step * 2.0, 1e6)
        accepted = False
        for _ in range(80):
            W_new = W - step * gW
            b_new = b - step * gb
            new_loss, gW_new, gb_new = softmax_loss_grad(Xs, yc, W_new, b_new, lam)
            if not np.isfinite(new_loss):
                raise AnalysisError(f"non-finite loss at iteration {it}, step {step}")
            if new_loss <= loss - 1e-4 * step * g2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # step underflow: no representable descent step remains
            converged = True
            it -= 1
            break
        if new_loss > loss:
            raise AnalysisError(f"objective increased at iteration {it}")
        W, b, loss, gW, gb = W_new, b_new, new_loss, gW_new, gb_new
        trace.append(loss)

    return LogRegModel(classes, mean, inv_scale, W, b,
                       np.array(trace), it, converged)


def logreg_predict(model: LogRegModel, X: np.ndarray) -> list[str]:
    Xs = (np.asarray(X, dtype=np.float64) - model.mean) * model.inv_scale
    logits = Xs @ model.weights + model.bias
    return [model.classes[i] for i in logits.argmax(axis=1)]


def logreg_cv(ds: EmbeddingDataset, folds: FoldAssignment, target: str,
              lam: float = DEFAULT_LAMBDA, max_iter: int = 5000,
              grad_tol: float = 1e-6) -> EvalResult:
    """Cross-validated regression probe; standardization is fit per training fold."""
    codes, classes = _target_codes(ds, target)
    labels = np.array([classes[c] for c in codes], dtype=object)
    pred = np.empty(ds.n, dtype=np.intp)
    index = {c: i for i, c in enumerate(classes)}
    for f in range(folds.n_folds):
        val = folds.fold_of == f
        if not val.any():
            continue
        train = ~val
        train_classes = set(labels[train])
        if len(train_classes) < 2:
            only = next(iter(train_classes))
            pred[val] = index[only]
            continue
        model = logreg_fit(ds.vectors[train], labels[train], lam=lam,
                           max_iter=max_iter, grad_tol=grad_tol)
        pred[val] = [index[p] for p in logreg_predict(model, ds.vectors[val])]
    return _make_result(ds, target, "logreg", None, pred, classes, folds)


# ---------------------------------------------------------------------------
# confounder attribution
# ---------------------------------------------------------------------------

def restrict_for_confounders(ds: EmbeddingDataset) -> EmbeddingDataset:
    """Keep only biological classes that have samples in every confounder class.

    This equalizes the number of confounder groups available to every
    retained sample, making 1/len(conf_classes) the chance level for the
    same-center fraction.
    """
    counts = class_count_matrix(ds)
    full_rows = (counts.counts > 0).all(axis=1)
    if not full_rows.any():
        raise AnalysisError(
            "no biological class has samples in every confounder class; "
            "restrict the dataset manually to a comparable subset")
    keep_codes = set(np.nonzero(full_rows)[0])
    if len(keep_codes) == len(ds.bio_classes):
        return ds
    indices = np.nonzero(np.isin(ds.bio_codes, list(keep_codes)))[0]
    return ds.subset(indices)


def _resolve_seeds(reps: int, seeds: Sequence[int] | None) -> tuple[int, ...]:
    if seeds is None:
        return tuple(range(reps))
    seeds = tuple(int(s) for s in seeds)
    if len(seeds) != reps:
        raise ValueError(f"got {len(seeds)} seeds for {reps} reps")
    return seeds


def confounder_analysis(
    ds: EmbeddingDataset,
    n_folds: int = 5,
    k_grid: Sequence[int] = DEFAULT_K_GRID,
    reps: int = DEFAULT_REPS,
    seeds: Sequence[int] | None = None,
    nt: NeighborTable | None = None,
) -> ConfounderReport:
    """Fraction of wrong-class neighbor votes that share the sample's confounder.

    For each repetition the dataset is re-folded with a fresh seed; for each
    k the kNN bio probe runs and, for every misclassified sample, the
    neighbors carrying the predicted (wrong) class are inspected for
    confounder agreement. Companion accuracy curves for both targets come
    from the same folds. ``ds`` should normally be the output of
    ``restrict_for_confounders``.
    """
    from .neighbors import build_neighbor_table

    k_grid = tuple(int(k) for k in k_grid)
    if any(k < 1 for k in k_grid):
        raise AnalysisError("k grid values must be >= 1")
    seeds = _resolve_seeds(reps, seeds)
    if nt is None:
        nt = build_neighbor_table(ds)
    max_k = max(k_grid)
    n_bio = len(ds.bio_classes)
    n_conf = len(ds.conf_classes)

    fractions: list[list[float]] = [[] for _ in k_grid]
    acc_bio = np.zeros((reps, len(k_grid)))
    acc_conf = np.zeros((reps, len(k_grid)))
    for r, rep_seed in enumerate(seeds):
        folds = assign_folds(ds, n_folds, rep_seed)
        prefix = _training_neighbor_prefix(nt, folds, max_k)
        nb_bio = ds.bio_codes[prefix]
        nb_conf = ds.conf_codes[prefix]
        for ki, k in enumerate(k_grid):
            pred = _vote(nb_bio, k, n_bio)
            correct = pred == ds.bio_codes
            acc_bio[r, ki] = np.mean(_fold_accuracy(correct, folds))
            pred_conf = _vote(nb_conf, k, n_conf)
            acc_conf[r, ki] = np.mean(_fold_accuracy(pred_conf == ds.conf_codes, folds))
            wrong = np.nonzero(~correct)[0]
            if len(wrong) == 0:
                continue
            confounding = nb_bio[wrong, :k] == pred[wrong, None]
            same_center = confounding & (nb_conf[wrong, :k] == ds.conf_codes[wrong, None])
            totals = confounding.sum(axis=1)
            fractions[ki].extend((same_center.sum(axis=1) / totals).tolist())

    frac = np.array([np.mean(f) if f else np.nan for f in fractions])
    n_mis = np.array([len(f) for f in fractions], dtype=np.int64)
    return ConfounderReport(
        k_grid=k_grid, reps=reps, seeds=seeds,
        frac_same_center=frac,
        acc_bio=acc_bio.mean(axis=0), acc_conf=acc_conf.mean(axis=0),
        chance_level=1.0 / n_conf,
        n_misclassified=n_mis,
        bio_classes=ds.bio_classes)


def center_error_relation(
    ds: EmbeddingDataset,
    reps: int = DEFAULT_REPS,
    k_grid: Sequence[int] = DEFAULT_K_GRID,
    lam: float = DEFAULT_LAMBDA,
    seeds: Sequence[int] | None = None,
    n_folds: int = 5,
    nt: NeighborTable | None = None,
    logreg_max_iter: int = 5000,
) -> CenterErrorRelation:
    """Relate per-sample center-related kNN error rates to regression errors.

    The kNN-run ensemble is the full (repetition, k) product. Regression
    errors come from the bio-target CV probe using the first repetition's
    folds. Samples are binned into 10 equal-width bins on their
    center-related error fraction; each bin reports its regression error
    rate.
    """
    from .neighbors import build_neighbor_table

    k_grid = tuple(int(k) for k in k_grid)
    seeds = _resolve_seeds(reps, seeds)
    if nt is None:
        nt = build_neighbor_table(ds)
    max_k = max(k_grid)
    n_bio = len(ds.bio_classes)

    center_err_runs = np.zeros(ds.n, dtype=np.int64)
    first_folds: FoldAssignment | None = None
    for rep_seed in seeds:
        folds = assign_folds(ds, n_folds, rep_seed)
        if first_folds is None:
            first_folds = folds
        prefix = _training_neighbor_prefix(nt, folds, max_k)
        nb_bio = ds.bio_codes[prefix]
        nb_conf = ds.conf_codes[prefix]
        wrong_label = nb_bio != ds.bio_codes[:, None]
        same_conf = nb_conf == ds.conf_codes[:, None]
        both = wrong_label & same_conf
        for k in k_grid:
            pred = _vote(nb_bio, k, n_bio)
            miss = pred != ds.bio_codes
            majority = both[:, :k].sum(axis=1) * 2 > k
            center_err_runs += (miss & majority).astype(np.int64)

    total_runs = reps * len(k_grid)
    fraction = center_err_runs / total_runs

    logreg = logreg_cv(ds, first_folds, "bio", lam=lam, max_iter=logreg_max_iter)
    logreg_wrong = ~logreg.correct

    edges = np.linspace(0.0, 1.0, 11)
    bin_idx = np.minimum((fraction * 10).astype(np.intp), 9)
    counts = np.bincount(bin_idx, minlength=10)
    rates = np.full(10, np.nan)
    for i in range(10):
        mask = bin_idx == i
        if mask.any():
            rates[i] = float(logreg_wrong[mask].mean())

    for arr in (fraction, counts, rates):
        arr.flags.writeable = False
    return CenterErrorRelation(
        fraction_center_error=fraction, logreg_wrong=logreg_wrong,
        bin_edges=edges, bin_counts=counts, bin_logreg_error=rates,
        k_grid=k_grid, reps=reps, seeds=seeds, lam=lam)
