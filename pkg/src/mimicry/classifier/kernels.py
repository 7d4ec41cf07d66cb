"""Selects the threshold-search kernel at import time.

The compiled extension is preferred; the numpy implementation is the
fallback. Setting MIMICRY_PURE_KERNELS=1 forces the fallback, which the
equivalence tests and the benchmark rely on.
"""
from __future__ import annotations

import os

from . import _split_py

if os.environ.get("MIMICRY_PURE_KERNELS") == "1":
    _impl = _split_py
    BACKEND = "pure"
else:
    try:
        from . import _split as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _split_py
        BACKEND = "pure"

best_split_sorted = _impl.best_split_sorted


def backend() -> str:
    """Name of the active kernel implementation: 'compiled' or 'pure'."""
    return BACKEND
