"""Distance kernels: compiled extension when built, numpy fallback otherwise.

Both backends implement the same directed max-min reduction with identical
arithmetic; which one is active only changes speed.  ``BACKEND`` records the
selection for diagnostics and the benchmark.
"""

import math

import numpy as np

try:
    from . import _hausdorff as _impl

    BACKEND = "compiled"
except ImportError:  # no built extension: numpy path
    from . import fallback as _impl

    BACKEND = "fallback"

from . import fallback as _fallback


def _prepare(arr):
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError("point cloud must be a 2-d array")
    return out


def directed_max_min(a, b, metric="euclidean", force_fallback=False):
    """sup over a of inf over b of dist(a_i, b_j).

    Raises ValueError on an empty target cloud; an empty ``a`` gives 0.
    """
    a = _prepare(a)
    b = _prepare(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch")
    chebyshev = 1 if metric == "max" else 0
    impl = _fallback if force_fallback else _impl
    val = impl.directed_max_min(a, b, chebyshev)
    return val if chebyshev else math.sqrt(val)
