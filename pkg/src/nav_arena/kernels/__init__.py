"""Hot numeric kernels: compiled core with a numpy fallback.

The compiled extension (``nav_arena.kernels._core``, Cython) is preferred
when importable; otherwise the numpy implementation is used. Set
``NAV_ARENA_PURE=1`` to force the fallback, e.g. for benchmarking the two
backends against each other (see benchmarks/bench_kernels.py).
"""
from __future__ import annotations

import os

from . import _impl_py

if os.environ.get("NAV_ARENA_PURE"):
    _impl = _impl_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _impl_py
        BACKEND = "python"

raycast_ranges = _impl.raycast_ranges
min_clearances = _impl.min_clearances
disc_hits_grid = _impl.disc_hits_grid

__all__ = ["BACKEND", "raycast_ranges", "min_clearances", "disc_hits_grid"]
