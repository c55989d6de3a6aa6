"""Hot-kernel backend selection.

The KNN sweep and the layout force loop dominate runtime; both exist as a
compiled Cython extension and as a NumPy fallback with identical semantics.
The extension is preferred when importable; set CASESCOPE_KERNELS=numpy to
force the fallback.
"""

from __future__ import annotations

import os

_impl = None
if os.environ.get("CASESCOPE_KERNELS", "").lower() not in ("numpy", "fallback"):
    try:
        from casescope._kernels import _native as _impl

        BACKEND = "native"
    except ImportError:  # extension not built for this environment
        _impl = None

if _impl is None:
    from casescope._kernels import _fallback as _impl

    BACKEND = "numpy"

knn_query = _impl.knn_query
knn_all = _impl.knn_all
layout_run = _impl.layout_run


def backends() -> dict[str, object]:
    """Every importable backend, keyed by name (for tests and benchmarks)."""
    from casescope._kernels import _fallback

    out: dict[str, object] = {}
    try:
        from casescope._kernels import _native

        out["native"] = _native
    except ImportError:
        pass
    out["numpy"] = _fallback
    return out
