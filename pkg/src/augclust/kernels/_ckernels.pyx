# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused Cython implementations of the hot kernels.

Same contracts as ``_numpy_impl``; one pass over the similarity matrix
instead of a chain of full-size numpy temporaries.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

BACKEND = "cython"


def ntxent_loss_grad(sim, double temp, bint exclude_diagonal=True):
    """Loss and d(loss)/d(sim) of the temperature-scaled contrastive loss."""
    sim_arr = np.ascontiguousarray(sim, dtype=np.float64)
    if sim_arr.ndim != 2 or sim_arr.shape[0] != sim_arr.shape[1]:
        raise ValueError("similarity matrix must be square")
    if sim_arr.shape[0] < 2 and exclude_diagonal:
        raise ValueError("need at least 2 samples for off-diagonal negatives")
    if not temp > 0:
        raise ValueError("temperature must be positive")

    cdef double[:, ::1] s = sim_arr
    cdef Py_ssize_t n = s.shape[0]
    grad_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t i, j
    cdef double loss = 0.0
    cdef double m, den, v, inv_nt
    inv_nt = 1.0 / (n * temp)

    for i in range(n):
        m = -INFINITY
        for j in range(n):
            if exclude_diagonal and j == i:
                continue
            v = s[i, j] / temp
            if v > m:
                m = v
        den = 0.0
        for j in range(n):
            if exclude_diagonal and j == i:
                continue
            den += exp(s[i, j] / temp - m)
        loss += m + log(den) - s[i, i] / temp
        for j in range(n):
            if exclude_diagonal and j == i:
                grad[i, j] = -inv_nt
            else:
                grad[i, j] = exp(s[i, j] / temp - m) / den * inv_nt
        if not exclude_diagonal:
            grad[i, i] -= inv_nt
    return loss / n, grad_arr


def kmeans_assign(points, centroids):
    """Nearest-centroid labels and squared distances to the winner.

    Ties break to the lower centroid index.
    """
    x_arr = np.ascontiguousarray(points, dtype=np.float64)
    c_arr = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef double[:, ::1] x = x_arr
    cdef double[:, ::1] c = c_arr
    cdef Py_ssize_t n = x.shape[0], k = c.shape[0], dim = x.shape[1]
    labels_arr = np.empty(n, dtype=np.int64)
    mind_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef double[::1] mind = mind_arr
    cdef Py_ssize_t i, j, t, best_j
    cdef double best, d, diff

    for i in range(n):
        best = INFINITY
        best_j = 0
        for j in range(k):
            d = 0.0
            for t in range(dim):
                diff = x[i, t] - c[j, t]
                d += diff * diff
            if d < best:
                best = d
                best_j = j
        labels[i] = best_j
        mind[i] = best
    return labels_arr, mind_arr
