"""Graph node clustering with learnable structure/attribute augmentation.

Two graph views, the original and a learned augmentation, are encoded
by a shared smoothing-filter encoder and trained jointly with an
adversarial reconstruction term plus a cross-view contrastive term.
From a configurable epoch on, the learned structure is refined by the
cross-view sample similarity and high-confidence pseudo-labels.
"""

from .clustering import ClusterResult, kmeans
from .encoder import Encoder, ViewEmbeddings, encode, fuse
from .graphs import (DataError, Graph, NormalizedGraph, graph_filter,
                     load_graph, normalize)
from .kernels import BACKEND
from .metrics import MetricReport, ari, clustering_accuracy, evaluate, \
    macro_f1, nmi
from .refinement import (RefinementState, confidence_select,
                         cross_view_similarity, pseudo_label_matrix, refine)
from .synth import sbm_graph
from .trainer import TrainConfig, TrainReport, train

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClusterResult",
    "DataError",
    "Encoder",
    "Graph",
    "MetricReport",
    "NormalizedGraph",
    "RefinementState",
    "TrainConfig",
    "TrainReport",
    "ViewEmbeddings",
    "ari",
    "clustering_accuracy",
    "confidence_select",
    "cross_view_similarity",
    "encode",
    "evaluate",
    "fuse",
    "graph_filter",
    "kmeans",
    "load_graph",
    "macro_f1",
    "nmi",
    "normalize",
    "pseudo_label_matrix",
    "refine",
    "sbm_graph",
    "train",
]
