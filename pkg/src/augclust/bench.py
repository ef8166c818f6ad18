"""Timing comparison of the compiled kernels vs the numpy fallback.

Run as ``python -m augclust.bench`` or ``augclust bench``.
"""

from __future__ import annotations

import time

import numpy as np

from .kernels import _numpy_impl

try:
    from .kernels import _ckernels
except ImportError:
    _ckernels = None


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(n: int = 1500, d: int = 128, k: int = 8,
              repeats: int = 5, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    sim = rng.standard_normal((n, n))
    points = rng.standard_normal((n, d))
    centroids = rng.standard_normal((k, d))

    cases = [
        ("ntxent_loss_grad",
         lambda impl: impl.ntxent_loss_grad(sim, 0.5)),
        ("kmeans_assign",
         lambda impl: impl.kmeans_assign(points, centroids)),
    ]

    print(f"kernel benchmark: n={n} d={d} k={k}, best of {repeats}")
    if _ckernels is None:
        print("compiled extension not available; timing numpy fallback only")
    rows = []
    for name, call in cases:
        t_np = _best_of(lambda: call(_numpy_impl), repeats)
        row = {"kernel": name, "numpy_s": t_np}
        line = f"{name:>18}  numpy {t_np * 1e3:8.2f} ms"
        if _ckernels is not None:
            t_cy = _best_of(lambda: call(_ckernels), repeats)
            row["cython_s"] = t_cy
            row["speedup"] = t_np / t_cy
            line += f"  cython {t_cy * 1e3:8.2f} ms  ({t_np / t_cy:4.1f}x)"
        rows.append(row)
        print(line)
    return rows


if __name__ == "__main__":
    run_bench()
