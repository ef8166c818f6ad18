"""Dataset loading, validation, and normalized graph operators.

File formats (plain text):
  attributes  one node per line, comma-separated reals
  edges       one "u<TAB>v" pair per line, 0-based ids, undirected
  labels      one integer per line
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(Exception):
    """A dataset file is missing, malformed, or inconsistent."""


@dataclass
class Graph:
    """Attributed graph: attributes x (n, d), binary symmetric adjacency a."""

    x: np.ndarray
    a: np.ndarray
    labels: np.ndarray | None = None
    k: int | None = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def validate(self) -> "Graph":
        if self.x.ndim != 2:
            raise DataError("attribute matrix must be 2-D")
        if not np.all(np.isfinite(self.x)):
            raise DataError("attribute matrix contains non-finite entries")
        n = self.x.shape[0]
        if self.a.shape != (n, n):
            raise DataError(
                f"adjacency shape {self.a.shape} does not match {n} nodes")
        if not np.array_equal(self.a, self.a.T):
            raise DataError("adjacency must be symmetric")
        if not np.all((self.a == 0) | (self.a == 1)):
            raise DataError("adjacency entries must be 0 or 1")
        if np.any(np.diag(self.a) != 0):
            raise DataError("adjacency diagonal must be zero")
        if self.labels is not None:
            if len(self.labels) != n:
                raise DataError(
                    f"{len(self.labels)} labels for {n} nodes")
            if self.k is None:
                raise DataError("labelled graph needs a cluster count")
            if self.labels.min() < 0 or self.labels.max() >= self.k:
                raise DataError(
                    f"labels must lie in [0, {self.k})")
        return self


@dataclass
class NormalizedGraph:
    """Self-loop renormalized operators of a graph.

    a_hat is the symmetric normalization of a_tilde = a + I by the
    degree of a_tilde; l_tilde = I - a_hat is the rescaled Laplacian
    with eigenvalues in [0, 2].
    """

    degree: np.ndarray   # degrees of a + I
    a_tilde: np.ndarray
    a_hat: np.ndarray
    l_tilde: np.ndarray


def _read_lines(path) -> list[str]:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"dataset file not found: {p}")
    return p.read_text().splitlines()


def load_graph(attr_path, edge_path, label_path=None) -> Graph:
    """Build a validated Graph from attribute/edge(/label) files.

    Both orientations of every undirected edge are set, duplicates
    collapse, and self-loops in the raw file are dropped.
    """
    rows = []
    width = None
    for lineno, line in enumerate(_read_lines(attr_path), start=1):
        if not line.strip():
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise DataError(
                f"{attr_path}: malformed attribute line {lineno}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(
                f"{attr_path}: ragged attribute row at line {lineno} "
                f"({len(row)} values, expected {width})")
        rows.append(row)
    if not rows:
        raise DataError(f"{attr_path}: no attribute rows")
    x = np.asarray(rows, dtype=np.float64)
    n = x.shape[0]

    a = np.zeros((n, n), dtype=np.float64)
    for lineno, line in enumerate(_read_lines(edge_path), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"{edge_path}: malformed edge line {lineno}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError(
                f"{edge_path}: malformed edge line {lineno}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise DataError(
                f"{edge_path}: node id out of range at line {lineno}")
        if u == v:
            continue  # raw self-loops are dropped; renormalization re-adds one
        a[u, v] = 1.0
        a[v, u] = 1.0

    labels = None
    k = None
    if label_path is not None:
        vals = []
        for lineno, line in enumerate(_read_lines(label_path), start=1):
            if not line.strip():
                continue
            try:
                vals.append(int(line.strip()))
            except ValueError:
                raise DataError(
                    f"{label_path}: malformed label line {lineno}") from None
        labels = np.asarray(vals, dtype=np.int64)
        if len(labels) != n:
            raise DataError(
                f"{label_path}: {len(labels)} labels for {n} nodes")
        if labels.min() < 0:
            raise DataError(f"{label_path}: negative label")
        k = int(labels.max()) + 1

    return Graph(x=x, a=a, labels=labels, k=k).validate()


def normalize(g: Graph) -> NormalizedGraph:
    """Renormalized operators: add self-loops, then symmetric scaling."""
    a_tilde = g.a + np.eye(g.n)
    degree = a_tilde.sum(axis=1)
    d_inv_sqrt = 1.0 / np.sqrt(degree)
    a_hat = d_inv_sqrt[:, None] * a_tilde * d_inv_sqrt[None, :]
    l_tilde = np.eye(g.n) - a_hat
    return NormalizedGraph(degree=degree, a_tilde=a_tilde, a_hat=a_hat,
                           l_tilde=l_tilde)


def symmetric_normalize(structure: np.ndarray) -> np.ndarray:
    """Self-loop renormalization of an arbitrary nonnegative affinity."""
    st = structure + np.eye(structure.shape[0])
    deg = st.sum(axis=1)
    d_inv_sqrt = 1.0 / np.sqrt(deg)
    return d_inv_sqrt[:, None] * st * d_inv_sqrt[None, :]


def graph_filter(ng: NormalizedGraph, x: np.ndarray, t: int) -> np.ndarray:
    """Smooth attributes by t applications of a_hat; t=0 is the identity."""
    if t < 0:
        raise ValueError("filter depth must be >= 0")
    out = np.asarray(x, dtype=np.float64)
    for _ in range(t):
        out = ng.a_hat @ out
    return out


def apply_attr_norm(x: np.ndarray, kind: str) -> np.ndarray:
    """Optional per-row attribute normalization: none | l1 | l2."""
    if kind == "none":
        return x
    if kind == "l1":
        norms = np.abs(x).sum(axis=1, keepdims=True)
    elif kind == "l2":
        norms = np.sqrt((x * x).sum(axis=1, keepdims=True))
    else:
        raise ValueError(f"unknown attribute normalization: {kind!r}")
    return x / np.where(norms > 0, norms, 1.0)


def write_graph(out_dir, g: Graph, stem: str = "graph") -> dict[str, str]:
    """Write a graph in the loader's file formats; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    attr_path = out / f"{stem}.attrs"
    edge_path = out / f"{stem}.edges"
    with attr_path.open("w") as fh:
        for row in g.x:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    with edge_path.open("w") as fh:
        us, vs = np.nonzero(np.triu(g.a, k=1))
        for u, v in zip(us, vs):
            fh.write(f"{u}\t{v}\n")
    paths = {"attr": str(attr_path), "edges": str(edge_path)}
    if g.labels is not None:
        label_path = out / f"{stem}.labels"
        with label_path.open("w") as fh:
            for lab in g.labels:
                fh.write(f"{lab}\n")
        paths["labels"] = str(label_path)
    return paths
