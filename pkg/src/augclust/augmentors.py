"""Learnable view generation.

Structure augmentors emit an n-by-n affinity for the augmented view;
attribute augmentors emit replacement node attributes. All are trained
end-to-end through the tape. The four classic predefined augmentations
(feature masking, edge dropping/adding, diffusion) are provided as
non-learnable baselines.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .graphs import Graph, NormalizedGraph, normalize

STRUCTURE_KINDS = ("mlp", "gcn", "attention")
ATTRIBUTE_KINDS = ("mlp", "attention")
BASELINE_KINDS = ("mask_feature", "drop_edges", "add_edges", "diffusion")


def glorot(shape, rng: np.random.Generator) -> np.ndarray:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    fan_in, fan_out = shape[0], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class MlpStructureAugmentor:
    """Two-layer perceptron over adjacency rows; affinity is the clamped
    cosine similarity between the resulting row embeddings."""

    kind = "mlp"

    def __init__(self, n: int, hidden_dim: int, rng: np.random.Generator):
        self.hidden_dim = hidden_dim
        self.params = {
            "w1": glorot((n, hidden_dim), rng),
            "b1": np.zeros((1, hidden_dim)),
            "w2": glorot((hidden_dim, hidden_dim), rng),
            "b2": np.zeros((1, hidden_dim)),
        }

    def forward(self, pv: dict[str, ad.Var], a: ad.Var) -> ad.Var:
        h = ad.relu(ad.add(ad.matmul(a, pv["w1"]), pv["b1"]))
        f = ad.add(ad.matmul(h, pv["w2"]), pv["b2"])
        return ad.relu(ad.cosine_similarity_matrix(f, f))


class GcnStructureAugmentor:
    """Single graph-convolution layer; affinity is the clamped cosine
    similarity between the convolved embeddings."""

    kind = "gcn"

    def __init__(self, d: int, hidden_dim: int, rng: np.random.Generator):
        self.hidden_dim = hidden_dim
        self.params = {"w": glorot((d, hidden_dim), rng)}

    def forward(self, pv: dict[str, ad.Var], smoothed_x: ad.Var) -> ad.Var:
        # smoothed_x = a_hat @ x, constant per run
        f = ad.relu(ad.matmul(smoothed_x, pv["w"]))
        return ad.relu(ad.cosine_similarity_matrix(f, f))


class AttentionStructureAugmentor:
    """Edge attention over the self-looped support.

    Raw pair score is leaky_relu of n_src . (W x_i) + n_dst . (W x_j)
    (the concatenated attention vector split in two); weights are
    softmax-normalized over each node's neighborhood and zero off the
    support.
    """

    kind = "attention"

    def __init__(self, d: int, hidden_dim: int, rng: np.random.Generator):
        self.hidden_dim = hidden_dim
        self.params = {
            "w": glorot((d, hidden_dim), rng),
            "n_src": glorot((hidden_dim, 1), rng),
            "n_dst": glorot((hidden_dim, 1), rng),
        }

    def forward(self, pv: dict[str, ad.Var], x: ad.Var,
                support: np.ndarray) -> ad.Var:
        h = ad.matmul(x, pv["w"])
        s_src = ad.matmul(h, pv["n_src"])
        s_dst = ad.matmul(h, pv["n_dst"])
        scores = ad.leaky_relu(ad.add(s_src, ad.transpose(s_dst)), 0.2)
        return ad.masked_row_softmax(scores, support)


class MlpAttributeAugmentor:
    """Two-layer perceptron from attributes back to attribute space."""

    kind = "mlp"

    def __init__(self, d: int, hidden_dim: int, rng: np.random.Generator):
        self.hidden_dim = hidden_dim
        self.params = {
            "w1": glorot((d, hidden_dim), rng),
            "b1": np.zeros((1, hidden_dim)),
            "w2": glorot((hidden_dim, d), rng),
            "b2": np.zeros((1, d)),
        }

    def forward(self, pv: dict[str, ad.Var], x: ad.Var) -> ad.Var:
        h = ad.relu(ad.add(ad.matmul(x, pv["w1"]), pv["b1"]))
        return ad.add(ad.matmul(h, pv["w2"]), pv["b2"])


class AttentionAttributeAugmentor:
    """Self-attention over nodes: queries/keys/values are linear maps of
    the attributes; output mixes value rows by scaled softmax weights."""

    kind = "attention"

    def __init__(self, d: int, rng: np.random.Generator):
        self.d = d
        self.params = {
            "wq": glorot((d, d), rng),
            "wk": glorot((d, d), rng),
            "wv": glorot((d, d), rng),
        }

    def forward(self, pv: dict[str, ad.Var], x: ad.Var) -> ad.Var:
        xt = ad.transpose(x)
        q = ad.matmul(pv["wq"], xt)
        k = ad.matmul(pv["wk"], xt)
        v = ad.matmul(pv["wv"], xt)
        weights = ad.row_softmax(ad.matmul(ad.transpose(k), q),
                                 scale=np.sqrt(self.d))
        return ad.matmul(weights, ad.transpose(v))


def make_structure_augmentor(kind: str, n: int, d: int, hidden_dim: int,
                             rng: np.random.Generator):
    if kind == "mlp":
        return MlpStructureAugmentor(n, hidden_dim, rng)
    if kind == "gcn":
        return GcnStructureAugmentor(d, hidden_dim, rng)
    if kind == "attention":
        return AttentionStructureAugmentor(d, hidden_dim, rng)
    raise ValueError(f"unknown structure augmentor: {kind!r}")


def make_attribute_augmentor(kind: str, d: int, hidden_dim: int,
                             rng: np.random.Generator):
    if kind == "mlp":
        return MlpAttributeAugmentor(d, hidden_dim, rng)
    if kind == "attention":
        return AttentionAttributeAugmentor(d, rng)
    raise ValueError(f"unknown attribute augmentor: {kind!r}")


def _wrap(params: dict[str, np.ndarray]) -> dict[str, ad.Var]:
    return {name: ad.parameter(p) for name, p in params.items()}


# array-level entry points (constant inputs, no tape kept)

def mlp_structure(a: np.ndarray, aug: MlpStructureAugmentor) -> np.ndarray:
    return aug.forward(_wrap(aug.params), ad.constant(a)).value


def gcn_structure(ng: NormalizedGraph, x: np.ndarray,
                  aug: GcnStructureAugmentor) -> np.ndarray:
    return aug.forward(_wrap(aug.params), ad.constant(ng.a_hat @ x)).value


def attention_structure(g: Graph, aug: AttentionStructureAugmentor) -> np.ndarray:
    support = (g.a + np.eye(g.n)) > 0
    return aug.forward(_wrap(aug.params), ad.constant(g.x), support).value


def mlp_attribute(x: np.ndarray, aug: MlpAttributeAugmentor) -> np.ndarray:
    return aug.forward(_wrap(aug.params), ad.constant(x)).value


def attention_attribute(x: np.ndarray,
                        aug: AttentionAttributeAugmentor) -> np.ndarray:
    return aug.forward(_wrap(aug.params), ad.constant(x)).value


def baseline_augment(g: Graph, kind: str, rate: float,
                     seed: int) -> tuple[np.ndarray, np.ndarray]:
    """One of the four predefined augmentations; returns (structure, attrs).

    rate=0 leaves the graph unchanged for every kind. Reproducible for a
    fixed seed.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline augmentation: {kind!r}")
    if rate == 0.0:
        return g.a.copy(), g.x.copy()
    rng = np.random.default_rng(seed)

    if kind == "mask_feature":
        x = g.x.copy()
        n_mask = int(rate * g.d)
        for i in range(g.n):
            cols = rng.choice(g.d, size=n_mask, replace=False)
            x[i, cols] = 0.0
        return g.a.copy(), x

    if kind == "diffusion":
        a_hat = normalize(g).a_hat
        eye = np.eye(g.n)
        # eigenvalues of the system matrix are >= rate > 0, never singular
        assert rate > 0
        return rate * np.linalg.solve(eye - (1.0 - rate) * a_hat, eye), g.x.copy()

    us, vs = np.nonzero(np.triu(g.a, k=1))
    n_edges = len(us)
    n_change = int(rate * n_edges)
    a = g.a.copy()
    if kind == "drop_edges":
        idx = rng.choice(n_edges, size=n_change, replace=False)
        a[us[idx], vs[idx]] = 0.0
        a[vs[idx], us[idx]] = 0.0
        return a, g.x.copy()

    # add_edges
    cu, cv = np.nonzero(np.triu(np.ones((g.n, g.n)), k=1) - np.triu(g.a, k=1))
    if n_change > len(cu):
        raise ValueError(
            f"cannot add {n_change} edges: only {len(cu)} non-edges available")
    idx = rng.choice(len(cu), size=n_change, replace=False)
    a[cu[idx], cv[idx]] = 1.0
    a[cv[idx], cu[idx]] = 1.0
    return a, g.x.copy()
