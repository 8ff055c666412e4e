"""
Optional numba acceleration.

Set ``SHIFTFRECHET_NO_JIT=1`` to force the pure-numpy code paths even when
numba is importable.
"""

import os

_FLAG = "SHIFTFRECHET_NO_JIT"


def _jit_disabled() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    NUMBA_AVAILABLE = False
    _njit = None

USE_JIT = NUMBA_AVAILABLE and not _jit_disabled()


def njit(fn):
    """Compile ``fn`` with numba if available, else return ``None``.

    Returning ``None`` (rather than the plain function) keeps callers honest:
    a loop kernel executed by the interpreter would be far slower than the
    numpy fallback, so dispatch code must pick the fallback explicitly.
    """
    if not NUMBA_AVAILABLE:
        return None
    return _njit(cache=True, nogil=True)(fn)


def backend_name() -> str:
    return "numba" if USE_JIT else "numpy"
