"""Reduction kernel selection.

The compiled Cython backend is used when importable; otherwise the
pure-Python implementation takes over.  Setting VOXTOPO_PURE=1 forces the
fallback, which is handy for benchmarking and debugging.
"""

from __future__ import annotations

import os

if os.environ.get("VOXTOPO_PURE"):
    from . import reduction_py as _impl

    BACKEND = "pure"
else:
    try:
        from . import _reduction as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import reduction_py as _impl

        BACKEND = "pure"

reduce_filtration = _impl.reduce_filtration
dim0_pairs = _impl.dim0_pairs


def backend() -> str:
    """Name of the active backend: 'compiled' or 'pure'."""
    return BACKEND
