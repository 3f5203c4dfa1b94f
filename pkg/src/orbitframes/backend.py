"""Kernel backend selection.

Hot loops (grid eigenvalue scans, truncated orbit sums, bilateral Fourier
sums) exist twice: a numba @njit version and a pure-numpy version. The env
var ORBITFRAMES_BACKEND picks one:

    ORBITFRAMES_BACKEND=numba   force jit kernels (error if numba missing)
    ORBITFRAMES_BACKEND=numpy   force the pure-numpy path
    unset / auto                numba when importable, numpy otherwise

ORBITFRAMES_THREADS caps numba's thread pool; the numpy path is single
threaded apart from BLAS internals.
"""

from __future__ import annotations

import os

_VALID = ("auto", "numba", "numpy")


def _read_flag() -> str:
    flag = os.environ.get("ORBITFRAMES_BACKEND", "auto").strip().lower()
    if flag not in _VALID:
        raise ValueError(
            f"ORBITFRAMES_BACKEND must be one of {_VALID}, got {flag!r}"
        )
    return flag


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


_HAS_NUMBA = _numba_available()
_FORCED: str | None = None


def set_backend(name: str | None) -> None:
    """Override the env flag in-process (tests and benchmarks)."""
    global _FORCED
    if name is not None and name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    _FORCED = name


def active_backend() -> str:
    """Resolve the backend actually used: 'numba' or 'numpy'."""
    flag = _FORCED if _FORCED is not None else _read_flag()
    if flag == "numba":
        if not _HAS_NUMBA:
            raise RuntimeError("ORBITFRAMES_BACKEND=numba but numba is not importable")
        return "numba"
    if flag == "numpy":
        return "numpy"
    return "numba" if _HAS_NUMBA else "numpy"


def use_numba() -> bool:
    return active_backend() == "numba"


def apply_thread_cap() -> int | None:
    """Apply ORBITFRAMES_THREADS to numba if set; returns the cap or None."""
    raw = os.environ.get("ORBITFRAMES_THREADS")
    if raw is None:
        return None
    n = max(1, int(raw))
    if _HAS_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n
