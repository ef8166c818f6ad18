"""Hot-kernel backend selection.

The compiled Cython extension is preferred when it imported cleanly;
otherwise the pure-numpy fallback takes over. Setting the environment
variable ``AUGCLUST_PURE_PYTHON=1`` forces the fallback. Both backends
implement identical contracts; ``python -m augclust.bench`` compares
their speed.
"""

import os

from . import _numpy_impl

if os.environ.get("AUGCLUST_PURE_PYTHON"):
    _impl = _numpy_impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy_impl

BACKEND = _impl.BACKEND
ntxent_loss_grad = _impl.ntxent_loss_grad
kmeans_assign = _impl.kmeans_assign

__all__ = ["BACKEND", "ntxent_loss_grad", "kmeans_assign"]
