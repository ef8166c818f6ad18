"""Shared helpers: finite-difference oracles and tiny training setups."""

from __future__ import annotations

import numpy as np
import pytest

from augclust import autodiff as ad
from augclust.clustering import kmeans
from augclust.encoder import fuse
from augclust.graphs import Graph
from augclust.refinement import confidence_select, pseudo_label_matrix
from augclust.synth import sbm_graph
from augclust.trainer import TrainConfig, Trainer


def fd_gradient(fn, arr: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central finite differences of a scalar fn w.r.t. arr, in place."""
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        plus = fn()
        flat[i] = orig - h
        minus = fn()
        flat[i] = orig
        gflat[i] = (plus - minus) / (2.0 * h)
    return grad


def rel_error(a: np.ndarray, b: np.ndarray) -> float:
    """Norm-based relative disagreement of two gradients."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    return float(np.linalg.norm(a - b)) / max(na, nb, 1e-10)


def random_graph(n: int, d: int, seed: int, k: int = 2,
                 edge_prob: float = 0.4) -> Graph:
    """Small random graph with labels, for gradient and unit tests."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < edge_prob, k=1)
    a = (upper | upper.T).astype(np.float64)
    x = rng.standard_normal((n, d))
    labels = rng.integers(0, k, size=n).astype(np.int64)
    labels[:k] = np.arange(k)  # every cluster represented
    return Graph(x=x, a=a, labels=labels, k=k).validate()


def frozen_agreement(trainer: Trainer) -> np.ndarray:
    """Agreement matrix from the trainer's current state, held constant
    while finite differences perturb the parameters."""
    pv = trainer.wrap_params()
    _, _, f1, f2 = trainer.build_views(pv)
    fused = fuse(f1.value, f2.value)
    clusters = kmeans(fused, trainer.k, seed=trainer.cfg.seed)
    p, _, mask = confidence_select(fused, clusters.centroids,
                                   trainer.cfg.tau,
                                   trainer.cfg.confidence_rule)
    return pseudo_label_matrix(p, mask)


def check_trainer_gradients(trainer: Trainer, z: np.ndarray | None,
                            h: float = 1e-4, tol: float = 1e-5) -> float:
    """Analytic vs finite-difference gradients of the total loss for
    every parameter; returns the worst relative error."""
    loss, pv = trainer.loss_with_frozen_refinement(z)
    ad.backward(loss)
    worst = 0.0
    for name, arr in trainer.model.parameters().items():
        analytic = pv[name].grad
        if analytic is None:
            analytic = np.zeros_like(arr)
        fd = fd_gradient(
            lambda: float(trainer.loss_with_frozen_refinement(z)[0].value),
            arr, h=h)
        err = rel_error(analytic, fd)
        assert err < tol, f"gradient mismatch for {name}: rel error {err:.2e}"
        worst = max(worst, err)
    return worst


@pytest.fixture
def tiny_sbm() -> Graph:
    return sbm_graph(n_per_block=10, blocks=2, p_in=0.5, p_out=0.05,
                     attr_sep=4.0, seed=7, attr_dim=6)


def tiny_config(**overrides) -> TrainConfig:
    base = dict(epochs=4, stage2_start=2, hidden_dim=8, embedding_dim=6,
                filter_depth=1, seed=0, k=2)
    base.update(overrides)
    return TrainConfig(**base)
