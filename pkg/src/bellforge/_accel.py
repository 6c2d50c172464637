"""Pick the kernel backend at import time.

The compiled ``_ckernels`` module is preferred; the numpy versions in
``_pykernels`` are used when it is missing or when ``BELLFORGE_PURE_PYTHON``
is set to a non-empty value other than ``0``.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("BELLFORGE_PURE_PYTHON", "0") in ("", "0"):
    kernels = compiled_kernels
    BACKEND = "cython"
else:
    kernels = _pykernels
    BACKEND = "python"


def get_kernels(backend=None):
    """Return the kernel module for ``backend`` ("cython", "python" or None for the default)."""
    if backend is None:
        return kernels
    if backend == "python":
        return _pykernels
    if backend == "cython":
        if compiled_kernels is None:
            raise ImportError("bellforge._ckernels is not built")
        return compiled_kernels
    raise ValueError(f"unknown backend {backend!r}")
