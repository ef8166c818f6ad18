"""Synthetic block-model datasets for desk-scale experiments."""

from __future__ import annotations

import numpy as np

from .graphs import Graph


def sbm_graph(n_per_block: int, blocks: int, p_in: float, p_out: float,
              attr_sep: float, seed: int, attr_dim: int = 16) -> Graph:
    """Stochastic block model with Gaussian-blob attributes.

    Within-block edges appear with probability p_in, cross-block with
    p_out. Attribute means of the blocks sit attr_sep apart along
    distinct axes with unit-variance noise. Fully deterministic for a
    fixed seed.
    """
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValueError("edge probabilities must lie in [0, 1]")
    if n_per_block < 1 or blocks < 1:
        raise ValueError("need at least one node per block and one block")
    attr_dim = max(attr_dim, blocks)

    rng = np.random.default_rng(seed)
    n = n_per_block * blocks
    labels = np.repeat(np.arange(blocks), n_per_block)

    prob = np.where(labels[:, None] == labels[None, :], p_in, p_out)
    upper = np.triu(rng.random((n, n)) < prob, k=1)
    a = (upper | upper.T).astype(np.float64)

    means = np.zeros((blocks, attr_dim))
    means[np.arange(blocks), np.arange(blocks)] = attr_sep
    x = means[labels] + rng.standard_normal((n, attr_dim))

    return Graph(x=x, a=a, labels=labels.astype(np.int64),
                 k=blocks).validate()
