"""Kernel backend selection.

The compiled extension is preferred when it imports; the NumPy fallback
is used otherwise.  Set ``QDIVIDE_PURE_PYTHON=1`` to force the fallback
(useful for the backend benchmark and for debugging).
"""

import os

if os.environ.get("QDIVIDE_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name() -> str:
    """Name of the active kernel backend: 'cython' or 'numpy'."""
    return kernels.BACKEND
