"""Siamese view encoder and embedding fusion.

One parameter set encodes both the original and the augmented view:
renormalize the structure with a self-loop, smooth the attributes with
the resulting filter, project linearly, and row-normalize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .augmentors import glorot


def sym_normalize_var(structure: ad.Var) -> ad.Var:
    """Differentiable self-loop renormalization of a nonnegative affinity."""
    n = structure.shape[0]
    st = ad.add(structure, ad.constant(np.eye(n)))
    d_inv_sqrt = ad.power(ad.row_sums(st), -0.5)
    return ad.mul(ad.mul(d_inv_sqrt, st), ad.transpose(d_inv_sqrt))


class Encoder:
    """Linear projection behind a depth-t smoothing filter."""

    def __init__(self, d: int, embedding_dim: int, filter_depth: int,
                 rng: np.random.Generator):
        self.embedding_dim = embedding_dim
        self.filter_depth = filter_depth
        self.params = {"w": glorot((d, embedding_dim), rng)}

    def forward(self, pv: dict[str, ad.Var], structure: ad.Var,
                attributes: ad.Var, pre_normalized: bool = False) -> ad.Var:
        op = structure if pre_normalized else sym_normalize_var(structure)
        # projecting before smoothing equals smoothing before projecting
        # (matrix products associate) and costs O(n^2 d) instead of O(n^2 D)
        h = ad.matmul(attributes, pv["w"])
        for _ in range(self.filter_depth):
            h = ad.matmul(op, h)
        return ad.row_l2_normalize(h)


def encode(encoder: Encoder, structure: np.ndarray,
           attributes: np.ndarray) -> np.ndarray:
    """Array-level encode of one view with the encoder's current weights."""
    pv = {name: ad.parameter(p) for name, p in encoder.params.items()}
    return encoder.forward(pv, ad.constant(structure),
                           ad.constant(attributes)).value


def fuse(f_v1: np.ndarray, f_v2: np.ndarray) -> np.ndarray:
    """Entrywise mean of the two view embeddings."""
    if f_v1.shape != f_v2.shape:
        raise ValueError(
            f"fuse shape mismatch: {f_v1.shape} vs {f_v2.shape}")
    return 0.5 * (f_v1 + f_v2)


@dataclass
class ViewEmbeddings:
    """Row-normalized per-view embeddings and their fusion."""

    f_v1: np.ndarray
    f_v2: np.ndarray
    f_fused: np.ndarray
