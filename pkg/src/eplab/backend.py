"""Kernel backend selection: numba JIT by default, pure Python on demand.

Set EPLAB_NO_NUMBA=1 to force the pure-Python path (or when numba is not
installed).  Both paths run the same source, so results are identical;
benchmarks/bench_backends.py compares their speed.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("EPLAB_NO_NUMBA", "") not in ("", "0")

try:
    from numba import njit as _njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and not _DISABLED


def maybe_jit(fn):
    """Compile fn with numba when enabled, otherwise return it unchanged."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(fn)
    return fn
