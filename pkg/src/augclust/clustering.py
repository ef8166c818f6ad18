"""Deterministic k-means with plus-plus seeding and Lloyd iterations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import kmeans_assign


@dataclass
class ClusterResult:
    assignments: np.ndarray  # int64, length n
    centroids: np.ndarray    # (k, d)
    inertia: float
    n_iter: int


def _plusplus_init(points: np.ndarray, k: int,
                   rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[int(rng.integers(n))]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = 0  # all points coincide with chosen centroids
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(points, labels, mind, centroids):
    """Reseed empty clusters from the farthest points, then reassign."""
    k = centroids.shape[0]
    counts = np.bincount(labels, minlength=k)
    empties = np.flatnonzero(counts == 0)
    if len(empties) == 0:
        return labels, mind, centroids
    order = np.argsort(-mind, kind="stable")
    for rank, c in enumerate(empties):
        centroids[c] = points[order[rank]]
    labels, mind = kmeans_assign(points, centroids)
    return labels, mind, centroids


def kmeans(points: np.ndarray, k: int, seed: int = 0, max_iter: int = 300,
           tol: float = 1e-6) -> ClusterResult:
    """Lloyd iterations from plus-plus seeds until the largest centroid
    shift drops below tol. Deterministic for a fixed seed; distance ties
    break to the lower centroid index; empty clusters are reseeded from
    the farthest point.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D matrix")
    if not np.all(np.isfinite(points)):
        raise ValueError("k-means input contains NaN/Inf")
    n = points.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"k={k} out of range for {n} points")

    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(points, k, rng)
    labels, mind = kmeans_assign(points, centroids)
    labels, mind, centroids = _repair_empty(points, labels, mind, centroids)

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = points[members].mean(axis=0)
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        labels, mind = kmeans_assign(points, centroids)
        labels, mind, centroids = _repair_empty(points, labels, mind,
                                                centroids)
        if shift < tol:
            break

    return ClusterResult(assignments=labels, centroids=centroids,
                         inertia=float(mind.sum()), n_iter=n_iter)
