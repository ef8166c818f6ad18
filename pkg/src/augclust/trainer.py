"""Joint training loop.

One optimizer minimizes L = L_a + alpha * L_c over augmentor and
encoder parameters together: L_a is a negated reconstruction error that
pushes the augmented view away from the original (diversity), L_c is a
temperature-scaled contrastive loss that pulls the two views' embeddings
together (consistency). From ``stage2_start`` on, the learned structure
is damped by the cross-view similarity and the high-confidence
pseudo-label agreement matrix before entering L_a.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .augmentors import (ATTRIBUTE_KINDS, BASELINE_KINDS, STRUCTURE_KINDS,
                         baseline_augment, make_attribute_augmentor,
                         make_structure_augmentor)
from .clustering import ClusterResult, kmeans
from .encoder import Encoder, fuse
from .graphs import Graph, apply_attr_norm, normalize
from .metrics import MetricReport, evaluate
from .optim import Adam, clip_global_norm
from .refinement import (CONFIDENCE_RULES, confidence_select,
                         pseudo_label_matrix, refine)

# defaults from the evaluation protocol this toolkit follows
DATASET_LEARNING_RATES = {
    "uat": 1e-3,
    "cora": 1e-4,
    "citeseer": 1e-4,
    "amap": 1e-5,
    "bat": 1e-5,
    "eat": 1e-7,
}

NTXENT_VARIANTS = ("paper", "standard")


@dataclass
class TrainConfig:
    alpha: float = 0.5
    tau: float = 0.95
    temp: float = 0.5
    lr: float = 1e-4
    epochs: int = 400
    stage2_start: int = 200
    seed: int = 0
    structure_augmentor: str = "attention"  # mlp | gcn | attention | none
    attribute_augmentor: str = "mlp"        # mlp | attention | none
    baseline_view: str = "none"             # replaces the learnable view
    baseline_rate: float = 0.2
    hidden_dim: int = 256
    embedding_dim: int = 128
    filter_depth: int = 2
    grad_clip: float = 5.0
    confidence_rule: str = "fraction"
    ntxent_variant: str = "paper"
    nmi_norm: str = "geometric"
    attr_norm: str = "none"
    k: int | None = None
    train_augmentors: bool = True  # internal: freeze augmentor parameters

    def validate(self) -> "TrainConfig":
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not self.temp > 0:
            raise ValueError("temp must be positive")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.stage2_start > self.epochs:
            raise ValueError("stage2_start must be <= epochs")
        if not self.filter_depth >= 0:
            raise ValueError("filter_depth must be >= 0")
        if self.structure_augmentor not in STRUCTURE_KINDS + ("none",):
            raise ValueError(
                f"unknown structure_augmentor: {self.structure_augmentor!r}")
        if self.attribute_augmentor not in ATTRIBUTE_KINDS + ("none",):
            raise ValueError(
                f"unknown attribute_augmentor: {self.attribute_augmentor!r}")
        if self.baseline_view not in BASELINE_KINDS + ("none",):
            raise ValueError(f"unknown baseline_view: {self.baseline_view!r}")
        if self.confidence_rule not in CONFIDENCE_RULES:
            raise ValueError(
                f"unknown confidence_rule: {self.confidence_rule!r}")
        if self.ntxent_variant not in NTXENT_VARIANTS:
            raise ValueError(
                f"unknown ntxent_variant: {self.ntxent_variant!r}")
        return self


@dataclass
class EpochRecord:
    epoch: int
    loss_total: float
    loss_a: float
    loss_c: float
    metrics: MetricReport | None = None


@dataclass
class TrainReport:
    config: dict
    epochs: list[EpochRecord]
    final_metrics: MetricReport | None
    embeddings: np.ndarray
    assignments: np.ndarray
    wall_clock_seconds: float = 0.0

    def to_json_dict(self) -> dict:
        """Deterministic payload: identical runs serialize identically,
        so wall-clock time is deliberately left out."""
        out = {
            "config": self.config,
            "epochs": [
                {
                    "epoch": r.epoch,
                    "loss_total": r.loss_total,
                    "loss_a": r.loss_a,
                    "loss_c": r.loss_c,
                    "metrics": r.metrics.as_dict() if r.metrics else None,
                }
                for r in self.epochs
            ],
            "final_metrics": (self.final_metrics.as_dict()
                              if self.final_metrics else None),
        }
        return out


# ---------------------------------------------------------------------------
# loss terms


def augmentation_loss(a: ad.Var, x: ad.Var, aug_s: ad.Var,
                      aug_x: ad.Var) -> ad.Var:
    """Negated reconstruction error of the augmented view (diversity)."""
    if a.shape != aug_s.shape or x.shape != aug_x.shape:
        raise ValueError("augmentation_loss shape mismatch")
    ds = ad.sub(a, aug_s)
    dx = ad.sub(x, aug_x)
    return ad.neg(ad.add(ad.sumv(ad.mul(ds, ds)), ad.sumv(ad.mul(dx, dx))))


def contrastive_loss(f_v1: ad.Var, f_v2: ad.Var, temp: float,
                     variant: str = "paper") -> ad.Var:
    """Cross-view contrastive loss over unit-normalized embeddings.

    "paper" keeps only the off-diagonal (negative) terms in each row
    denominator; "standard" includes the positive as well.
    """
    if variant not in NTXENT_VARIANTS:
        raise ValueError(f"unknown ntxent variant: {variant!r}")
    sim = ad.matmul(f_v1, ad.transpose(f_v2))
    return ad.ntxent_from_similarity(sim, temp,
                                     exclude_diagonal=(variant == "paper"))


def total_loss(l_a: ad.Var, l_c: ad.Var, alpha: float) -> ad.Var:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return ad.add(l_a, ad.scale(l_c, alpha))


# ---------------------------------------------------------------------------
# model + trainer


class Model:
    """Augmentors plus encoder bound to one graph, one training run."""

    def __init__(self, graph: Graph, cfg: TrainConfig):
        self.graph = graph
        self.cfg = cfg
        rng = np.random.default_rng(cfg.seed)
        self.x = apply_attr_norm(graph.x, cfg.attr_norm)
        self.a = graph.a
        self.ng = normalize(graph)
        self.support = (graph.a + np.eye(graph.n)) > 0

        self.structure_aug = None
        self.attribute_aug = None
        self.baseline = None
        if cfg.baseline_view != "none":
            self.baseline = baseline_augment(graph, cfg.baseline_view,
                                             cfg.baseline_rate, cfg.seed)
        else:
            if cfg.structure_augmentor != "none":
                self.structure_aug = make_structure_augmentor(
                    cfg.structure_augmentor, graph.n, graph.d,
                    cfg.hidden_dim, rng)
            if cfg.attribute_augmentor != "none":
                self.attribute_aug = make_attribute_augmentor(
                    cfg.attribute_augmentor, graph.d, cfg.hidden_dim, rng)
        self.encoder = Encoder(graph.d, cfg.embedding_dim, cfg.filter_depth,
                               rng)
        if self.structure_aug is not None and self.structure_aug.kind == "gcn":
            self._gcn_input = self.ng.a_hat @ self.x
        else:
            self._gcn_input = None

    def parameters(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        if self.structure_aug is not None:
            for name, p in self.structure_aug.params.items():
                out[f"struct.{name}"] = p
        if self.attribute_aug is not None:
            for name, p in self.attribute_aug.params.items():
                out[f"attr.{name}"] = p
        for name, p in self.encoder.params.items():
            out[f"encoder.{name}"] = p
        return out

    def trainable_parameters(self) -> dict[str, np.ndarray]:
        if self.cfg.train_augmentors:
            return self.parameters()
        return {name: p for name, p in self.parameters().items()
                if name.startswith("encoder.")}


def _sub_params(pv: dict[str, ad.Var], prefix: str) -> dict[str, ad.Var]:
    plen = len(prefix) + 1
    return {name[plen:]: v for name, v in pv.items()
            if name.startswith(prefix + ".")}


class Trainer:
    def __init__(self, graph: Graph, cfg: TrainConfig):
        cfg.validate()
        graph.validate()
        self.cfg = cfg
        self.k = cfg.k if cfg.k is not None else graph.k
        if self.k is None:
            raise ValueError("cluster count k is neither configured nor "
                             "derivable from labels")
        self.model = Model(graph, cfg)
        self.opt = Adam(self.model.trainable_parameters(), lr=cfg.lr)
        self._x_const = ad.constant(self.model.x)
        self._a_const = ad.constant(self.model.a)
        self._a_hat_const = ad.constant(self.model.ng.a_hat)

    # -- tape construction ---------------------------------------------------

    def wrap_params(self) -> dict[str, ad.Var]:
        return {name: ad.parameter(p)
                for name, p in self.model.parameters().items()}

    def build_views(self, pv: dict[str, ad.Var]):
        """Augmented view plus both encodings; returns (aug_s, aug_x, f1, f2)."""
        m = self.model
        if m.baseline is not None:
            aug_s = ad.constant(m.baseline[0])
            aug_x = ad.constant(m.baseline[1])
        else:
            if m.structure_aug is None:
                aug_s = self._a_const
            else:
                sp = _sub_params(pv, "struct")
                if m.structure_aug.kind == "mlp":
                    aug_s = m.structure_aug.forward(sp, self._a_const)
                elif m.structure_aug.kind == "gcn":
                    aug_s = m.structure_aug.forward(
                        sp, ad.constant(m._gcn_input))
                else:
                    aug_s = m.structure_aug.forward(sp, self._x_const,
                                                    m.support)
            if m.attribute_aug is None:
                aug_x = self._x_const
            else:
                aug_x = m.attribute_aug.forward(_sub_params(pv, "attr"),
                                                self._x_const)
        ep = _sub_params(pv, "encoder")
        f1 = m.encoder.forward(ep, self._a_hat_const, self._x_const,
                               pre_normalized=True)
        f2 = m.encoder.forward(ep, aug_s, aug_x)
        return aug_s, aug_x, f1, f2

    def build_losses(self, views, z: np.ndarray | None):
        """Losses over already-built views, refining the structure by the
        frozen agreement matrix z when given (stage 2)."""
        aug_s, aug_x, f1, f2 = views
        if z is not None:
            s = ad.matmul(f1, ad.transpose(f2))
            aug_s = refine(aug_s, s, z)
        l_a = augmentation_loss(self._a_const, self._x_const, aug_s, aug_x)
        l_c = contrastive_loss(f1, f2, self.cfg.temp, self.cfg.ntxent_variant)
        return total_loss(l_a, l_c, self.cfg.alpha), l_a, l_c

    def loss_with_frozen_refinement(self, z: np.ndarray | None = None):
        """One forward pass with the piecewise-constant refinement inputs
        held fixed; the function the analytic gradient differentiates."""
        pv = self.wrap_params()
        views = self.build_views(pv)
        loss, l_a, l_c = self.build_losses(views, z)
        return loss, pv

    # -- the per-epoch procedure ----------------------------------------------

    def train_epoch(self, epoch: int) -> EpochRecord:
        cfg = self.cfg
        pv = self.wrap_params()
        views = self.build_views(pv)
        _, _, f1, f2 = views

        fused = fuse(f1.value, f2.value)
        clusters = kmeans(fused, self.k, seed=cfg.seed)

        z = None
        if epoch >= cfg.stage2_start:
            p, conf, mask = confidence_select(fused, clusters.centroids,
                                              cfg.tau, cfg.confidence_rule)
            z = pseudo_label_matrix(p, mask)

        loss, l_a, l_c = self.build_losses(views, z)
        ad.backward(loss)

        trainable = self.model.trainable_parameters()
        grads = {}
        for name in trainable:
            g = pv[name].grad
            grads[name] = g if g is not None else np.zeros_like(trainable[name])
        clip_global_norm(grads, cfg.grad_clip)
        self.opt.step(grads)

        metrics = None
        if self.model.graph.labels is not None:
            metrics = evaluate(self.model.graph.labels, clusters.assignments,
                               nmi_norm=cfg.nmi_norm)
        return EpochRecord(epoch=epoch, loss_total=float(loss.value),
                           loss_a=float(l_a.value), loss_c=float(l_c.value),
                           metrics=metrics)

    def final_state(self) -> tuple[np.ndarray, ClusterResult]:
        """Re-encode with the final parameters and cluster the fusion."""
        pv = self.wrap_params()
        _, _, f1, f2 = self.build_views(pv)
        fused = fuse(f1.value, f2.value)
        return fused, kmeans(fused, self.k, seed=self.cfg.seed)


def train(cfg: TrainConfig, graph: Graph) -> TrainReport:
    """Run the full two-stage schedule and report per-epoch losses,
    final metrics, and the final fused embeddings."""
    start = time.perf_counter()
    trainer = Trainer(graph, cfg)
    records = []
    for epoch in range(cfg.epochs):
        try:
            records.append(trainer.train_epoch(epoch))
        except ad.NumericError as exc:
            raise ad.NumericError(f"epoch {epoch}: {exc}") from exc

    fused, clusters = trainer.final_state()
    final_metrics = None
    if graph.labels is not None:
        final_metrics = evaluate(graph.labels, clusters.assignments,
                                 nmi_norm=cfg.nmi_norm)
    return TrainReport(
        config=asdict(cfg),
        epochs=records,
        final_metrics=final_metrics,
        embeddings=fused,
        assignments=clusters.assignments,
        wall_clock_seconds=time.perf_counter() - start,
    )
