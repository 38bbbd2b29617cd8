"""Numba switch for the hot kernels.

Set ``PSFWSN_DISABLE_NUMBA=1`` to force the pure-numpy path. The choice can
also be flipped at runtime with :func:`set_backend`, which is what the
benchmarks and the kernel-equivalence tests do.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    HAVE_NUMBA = False

_FLAG = os.environ.get("PSFWSN_DISABLE_NUMBA", "").strip().lower()
_backend = "numpy" if (_FLAG in {"1", "true", "yes", "on"} or not HAVE_NUMBA) else "numba"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise the identity."""
    kwargs.setdefault("cache", True)
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda f: f


def backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` kernels; returns the previous choice."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev
