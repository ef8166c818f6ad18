"""Pure-numpy reference implementations of the hot kernels.

Same contracts as the Cython versions in ``_ckernels.pyx``; used when
the compiled extension is unavailable or explicitly disabled.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def ntxent_loss_grad(sim: np.ndarray, temp: float, exclude_diagonal: bool = True):
    """Loss and d(loss)/d(sim) of the temperature-scaled contrastive loss.

    ``sim[i, j]`` is the similarity between sample i in view 1 and
    sample j in view 2; diagonal entries are the positive pairs. Row
    denominators exclude the positive when ``exclude_diagonal`` is set.

    Returns ``(loss, grad)`` where ``grad`` has the shape of ``sim``.
    """
    sim = np.asarray(sim, dtype=np.float64)
    n = sim.shape[0]
    if sim.ndim != 2 or sim.shape[1] != n:
        raise ValueError("similarity matrix must be square")
    if n < 2 and exclude_diagonal:
        raise ValueError("need at least 2 samples for off-diagonal negatives")
    if not temp > 0:
        raise ValueError("temperature must be positive")

    s = sim / temp
    if exclude_diagonal:
        off = s.copy()
        np.fill_diagonal(off, -np.inf)
        m = off.max(axis=1, keepdims=True)
        e = np.exp(off - m)  # exp(-inf) = 0 on the diagonal
        denom = e.sum(axis=1, keepdims=True)
        lse = m[:, 0] + np.log(denom[:, 0])
        loss = float(np.mean(lse - np.diag(s)))
        grad = e / denom / (n * temp)
        np.fill_diagonal(grad, -1.0 / (n * temp))
    else:
        m = s.max(axis=1, keepdims=True)
        e = np.exp(s - m)
        denom = e.sum(axis=1, keepdims=True)
        lse = m[:, 0] + np.log(denom[:, 0])
        loss = float(np.mean(lse - np.diag(s)))
        grad = e / denom / (n * temp)
        grad[np.diag_indices(n)] -= 1.0 / (n * temp)
    return loss, grad


def kmeans_assign(points: np.ndarray, centroids: np.ndarray):
    """Nearest-centroid labels and squared distances to the winner.

    Ties break to the lower centroid index. Returns
    ``(labels int64, min_sq_dists float64)``.
    """
    points = np.asarray(points, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    d2 = (
        (points * points).sum(axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    labels = d2.argmin(axis=1)  # argmin picks the first (lowest) index on ties
    mind = d2[np.arange(points.shape[0]), labels]
    return labels.astype(np.int64), np.maximum(mind, 0.0)
