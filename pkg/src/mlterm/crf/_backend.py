"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``MLTERM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

pure = _pykernels

if os.environ.get("MLTERM_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"


def get(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python') or the default."""
    if name is None:
        return kernels
    if name == "python":
        return pure
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled CRF kernels are not available")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
