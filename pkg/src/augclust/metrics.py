"""Clustering evaluation: accuracy under optimal label assignment,
normalized mutual information, adjusted Rand index, and macro F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class MetricReport:
    acc: float
    nmi: float
    ari: float
    f1: float

    def as_dict(self) -> dict:
        return {"acc": self.acc, "nmi": self.nmi, "ari": self.ari,
                "f1": self.f1}


def _check_lengths(truth, pred):
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ValueError(
            f"label vectors must be equal-length 1-D, got {truth.shape} "
            f"and {pred.shape}")
    return truth, pred


def contingency_table(truth, pred) -> np.ndarray:
    """Counts[t, p] of samples with true label t and predicted label p."""
    truth, pred = _check_lengths(truth, pred)
    kt = int(truth.max()) + 1
    kp = int(pred.max()) + 1
    table = np.zeros((kt, kp), dtype=np.int64)
    np.add.at(table, (truth, pred), 1)
    return table


def best_mapping(truth, pred) -> dict[int, int]:
    """Optimal one-to-one predicted-to-true relabeling (Hungarian method
    on the negated contingency table)."""
    table = contingency_table(truth, pred)
    rows, cols = linear_sum_assignment(-table)
    return {int(p): int(t) for t, p in zip(rows, cols)}


def map_labels(pred, mapping: dict[int, int]) -> np.ndarray:
    """Relabel predictions; labels without a match become -1."""
    pred = np.asarray(pred, dtype=np.int64)
    return np.asarray([mapping.get(int(p), -1) for p in pred],
                      dtype=np.int64)


def clustering_accuracy(truth, pred) -> float:
    """Largest agreement fraction over one-to-one cluster relabelings."""
    truth, pred = _check_lengths(truth, pred)
    table = contingency_table(truth, pred)
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum() / len(truth))


def nmi(truth, pred, norm: str = "geometric") -> float:
    """Mutual information normalized by the geometric (default) or
    arithmetic mean of the two label entropies, natural logs.

    Conventions: 1 when both partitions are single-cluster, 0 when
    exactly one entropy is zero.
    """
    if norm not in ("geometric", "arithmetic"):
        raise ValueError(f"unknown nmi normalization: {norm!r}")
    table = contingency_table(truth, pred).astype(np.float64)
    n = table.sum()
    pi = table.sum(axis=1) / n
    pj = table.sum(axis=0) / n
    pij = table / n
    outer = np.outer(pi, pj)
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / outer[nz])).sum())
    h_t = float(-(pi[pi > 0] * np.log(pi[pi > 0])).sum())
    h_p = float(-(pj[pj > 0] * np.log(pj[pj > 0])).sum())
    if h_t == 0.0 and h_p == 0.0:
        return 1.0
    if h_t == 0.0 or h_p == 0.0:
        return 0.0
    denom = np.sqrt(h_t * h_p) if norm == "geometric" else 0.5 * (h_t + h_p)
    return float(mi / denom)


def ari(truth, pred) -> float:
    """Adjusted Rand index via pair counting; 1.0 when max equals the
    expected index (degenerate single-cluster convention)."""
    truth, pred = _check_lengths(truth, pred)
    n = len(truth)
    if n < 2:
        return 1.0
    table = contingency_table(truth, pred).astype(np.float64)

    def comb2(x):
        return x * (x - 1.0) / 2.0

    index = comb2(table).sum()
    a = comb2(table.sum(axis=1)).sum()
    b = comb2(table.sum(axis=0)).sum()
    expected = a * b / comb2(float(n))
    max_index = 0.5 * (a + b)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def macro_f1(truth, pred_mapped) -> float:
    """Unweighted mean of per-true-class F1. Predictions must already be
    relabeled by the optimal assignment; a class with zero precision and
    recall contributes 0."""
    truth, pred_mapped = _check_lengths(truth, pred_mapped)
    scores = []
    for c in np.unique(truth):
        tp = float(((truth == c) & (pred_mapped == c)).sum())
        n_pred = float((pred_mapped == c).sum())
        n_true = float((truth == c).sum())
        precision = tp / n_pred if n_pred > 0 else 0.0
        recall = tp / n_true if n_true > 0 else 0.0
        if precision + recall == 0.0:
            scores.append(0.0)
        else:
            scores.append(2.0 * precision * recall / (precision + recall))
    return float(np.mean(scores))


def evaluate(truth, pred, nmi_norm: str = "geometric") -> MetricReport:
    """All four metrics for one prediction."""
    mapping = best_mapping(truth, pred)
    mapped = map_labels(pred, mapping)
    return MetricReport(
        acc=clustering_accuracy(truth, pred),
        nmi=nmi(truth, pred, norm=nmi_norm),
        ari=ari(truth, pred),
        f1=macro_f1(truth, mapped),
    )
