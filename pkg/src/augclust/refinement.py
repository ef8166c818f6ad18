"""Dual refinement of the augmented structure.

Two entrywise masks damp the learned affinity: the cross-view sample
similarity (clamped to [0, 1]) and the binary agreement matrix built
from high-confidence pseudo-labels. Low-confidence pairs keep their
affinity untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad

CONFIDENCE_RULES = ("fraction", "absolute")


@dataclass
class RefinementState:
    """Everything the refinement step derived from the current epoch."""

    s: np.ndarray        # cross-view cosine similarity
    p: np.ndarray        # pseudo-label per node
    conf: np.ndarray     # assignment confidence in [0, 1]
    mask: np.ndarray     # nodes considered high-confidence
    z: np.ndarray        # binary agreement matrix
    tau: float


def cross_view_similarity(f_v1, f_v2):
    """Cosine similarity between view-1 rows and view-2 rows.

    Rows must already be unit-normalized, so the similarity is the plain
    inner product. Accepts tape nodes (differentiable) or arrays.
    """
    if isinstance(f_v1, ad.Var) or isinstance(f_v2, ad.Var):
        return ad.matmul(f_v1, ad.transpose(f_v2))
    if f_v1.shape != f_v2.shape:
        raise ValueError(
            f"view shape mismatch: {f_v1.shape} vs {f_v2.shape}")
    return f_v1 @ f_v2.T


def confidence_select(f_fused: np.ndarray, centroids: np.ndarray, tau: float,
                      rule: str = "fraction"):
    """Pseudo-labels, confidences, and the high-confidence mask.

    Confidence is the softmax over negative squared centroid distances,
    taken at the assigned centroid. Under the default "fraction" rule
    the ceil(tau * n) most confident nodes are selected; "absolute"
    keeps nodes with confidence >= tau.
    """
    if centroids.shape[0] < 2:
        raise ValueError("need at least 2 centroids")
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    if rule not in CONFIDENCE_RULES:
        raise ValueError(f"unknown confidence rule: {rule!r}")

    d2 = (
        (f_fused * f_fused).sum(axis=1)[:, None]
        - 2.0 * f_fused @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    p = d2.argmin(axis=1)  # ties break to the lower centroid index
    logits = -d2
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    probs = e / e.sum(axis=1, keepdims=True)
    conf = probs[np.arange(len(p)), p]

    if rule == "absolute":
        mask = conf >= tau
    else:
        n = len(conf)
        n_keep = int(np.ceil(tau * n))
        order = np.argsort(-conf, kind="stable")
        mask = np.zeros(n, dtype=bool)
        mask[order[:n_keep]] = True
    return p.astype(np.int64), conf, mask


def pseudo_label_matrix(p: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Binary agreement matrix over high-confidence pseudo-labels.

    Pairs where either node is low-confidence stay 1 (structure left
    untouched); both-confident pairs are 1 iff labels agree.
    """
    p = np.asarray(p)
    mask = np.asarray(mask, dtype=bool)
    if p.shape != mask.shape:
        raise ValueError("pseudo-labels and mask must have equal length")
    same = p[:, None] == p[None, :]
    both = mask[:, None] & mask[None, :]
    return np.where(both, same, True).astype(np.float64)


def refine(aug_s, s, z: np.ndarray):
    """Damp the learned affinity by clamp(s, 0, 1) and z, entrywise.

    Differentiable in aug_s and s when they are tape nodes; z is always
    treated as a constant mask.
    """
    if isinstance(aug_s, ad.Var) or isinstance(s, ad.Var):
        return ad.mul(ad.mul(ad._as_var(aug_s), ad.clamp(ad._as_var(s), 0.0, 1.0)),
                      ad.constant(z))
    if not (aug_s.shape == s.shape == z.shape):
        raise ValueError("refine expects three equal square matrices")
    return aug_s * np.clip(s, 0.0, 1.0) * z


def compute_refinement(f_v1: np.ndarray, f_v2: np.ndarray,
                       f_fused: np.ndarray, centroids: np.ndarray,
                       tau: float, rule: str = "fraction") -> RefinementState:
    """Bundle the full refinement state for one epoch (array level)."""
    s = cross_view_similarity(f_v1, f_v2)
    p, conf, mask = confidence_select(f_fused, centroids, tau, rule)
    z = pseudo_label_matrix(p, mask)
    return RefinementState(s=s, p=p, conf=conf, mask=mask, z=z, tau=tau)
