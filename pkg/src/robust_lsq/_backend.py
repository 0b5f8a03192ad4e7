"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback. Setting ``ROBUST_LSQ_PURE_PYTHON=1`` forces the fallback.
"""
import contextlib
import os

from . import _kernels_py

try:
    if os.environ.get("ROBUST_LSQ_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

HAS_COMPILED = _compiled is not None
kernels = _compiled if HAS_COMPILED else _kernels_py


def available():
    """Names of the usable backends, preferred first."""
    return [m.NAME for m in (_compiled, _kernels_py) if m is not None]


def get(name):
    for m in (_compiled, _kernels_py):
        if m is not None and m.NAME == name:
            return m
    raise ValueError(f"backend {name!r} is not available (have {available()})")


@contextlib.contextmanager
def use_backend(name):
    """Temporarily route every kernel call through backend ``name``."""
    global kernels
    saved = kernels
    kernels = get(name)
    try:
        yield kernels
    finally:
        kernels = saved
