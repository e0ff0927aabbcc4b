"""Link-prediction metrics and posterior label summaries."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "ScoredCells",
    "auc_roc",
    "average_precision",
    "precision_at_k",
    "label_proportions",
    "node_order",
    "proportions_from_counts",
    "scored_test_cells",
]


@dataclass(frozen=True)
class ScoredCells:
    scores: np.ndarray
    truths: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        truths = np.asarray(self.truths).ravel()
        if scores.shape != truths.shape:
            raise ValueError(f"{scores.size} scores but {truths.size} truths")
        if np.any((truths != 0) & (truths != 1)):
            raise ValueError("truths must be binary")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "truths", truths.astype(bool))

    @property
    def n_pos(self):
        return int(self.truths.sum())

    @property
    def n_neg(self):
        return int((~self.truths).sum())


def scored_test_cells(trace, R):
    """Pair a trace's posterior-mean TEST scores with the observed values."""
    return ScoredCells(trace.test_scores, R.entries[trace.test_rows, trace.test_cols])


def auc_roc(sc):
    """Probability that a random positive outscores a random negative (ties count 1/2)."""
    if sc.n_pos == 0:
        raise ValueError("AUC undefined: no positive cells")
    if sc.n_neg == 0:
        raise ValueError("AUC undefined: no negative cells")
    ranks = rankdata(sc.scores)  # midranks
    P, N = sc.n_pos, sc.n_neg
    return float((ranks[sc.truths].sum() - P * (P + 1) / 2) / (P * N))


def _tie_blocks(scores):
    """Distinct score levels in descending order, with inverse indices."""
    levels, inverse = np.unique(-scores, return_inverse=True)
    return levels.size, inverse


def average_precision(sc):
    """Mean precision at the rank of each positive, averaged over tie orders.

    Cells with equal scores are treated as a block whose internal order is
    uniformly random; the returned value is the exact expectation.
    """
    P = sc.n_pos
    if P == 0:
        raise ValueError("average precision undefined: no positive cells")
    nblocks, inverse = _tie_blocks(sc.scores)
    sizes = np.bincount(inverse, minlength=nblocks)
    pos = np.bincount(inverse, weights=sc.truths, minlength=nblocks).astype(np.int64)
    total = 0.0
    seen, seen_pos = 0, 0
    for m, p in zip(sizes.tolist(), pos.tolist()):
        if p:
            t = np.arange(1, m + 1)
            # a positive at block position t has (t-1)(p-1)/(m-1) other positives ahead of it
            others = (t - 1) * (p - 1) / (m - 1) if m > 1 else np.zeros(1)
            total += p / m * np.sum((seen_pos + 1 + others) / (seen + t))
        seen += m
        seen_pos += p
    return float(total / P)


def precision_at_k(sc, k=None):
    """Expected fraction of positives among the top `k` cells (default: #positives)."""
    k = sc.n_pos if k is None else int(k)
    if k <= 0:
        raise ValueError("k must be positive")
    nblocks, inverse = _tie_blocks(sc.scores)
    sizes = np.bincount(inverse, minlength=nblocks)
    pos = np.bincount(inverse, weights=sc.truths, minlength=nblocks)
    hits, room = 0.0, k
    for m, p in zip(sizes.tolist(), pos.tolist()):
        take = min(m, room)
        hits += p * take / m
        room -= take
        if room == 0:
            break
    return float(hits / k)


def label_proportions(trace, dimension="sender"):
    """Per-node label distribution pooled over retained sweeps and partners.

    Nodes that never carried a label get a uniform row.
    """
    if not trace.has_labels:
        raise ValueError(f"{trace.kind.value} trace carries no pairwise labels")
    if dimension == "sender":
        counts = trace.label_counts1
    elif dimension == "receiver":
        counts = trace.label_counts2
    else:
        raise ValueError(f"dimension must be 'sender' or 'receiver', got {dimension!r}")
    return proportions_from_counts(np.asarray(counts, dtype=np.float64))


def proportions_from_counts(counts):
    """Normalise count rows to probabilities; empty rows become uniform."""
    total = counts.sum(axis=1, keepdims=True)
    K = counts.shape[1]
    return np.where(total > 0, counts / np.where(total > 0, total, 1.0), 1.0 / K)


def node_order(proportions):
    """Order nodes by dominant label, then by descending dominant share, then id."""
    proportions = np.asarray(proportions)
    top = proportions.argmax(axis=1)
    share = proportions.max(axis=1)
    ids = np.arange(proportions.shape[0])
    return np.lexsort((ids, -share, top))
