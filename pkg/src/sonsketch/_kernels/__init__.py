"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; setting the
environment variable ``SONSKETCH_PURE=1`` forces the pure-numpy fallback
(useful for benchmarking and for debugging the kernels themselves).
"""

import os

from . import _pure

if os.environ.get("SONSKETCH_PURE"):
    _backend = _pure
else:
    try:
        from . import _compiled as _backend
    except ImportError:
        _backend = _pure

BACKEND = _backend.BACKEND
jacobi_eigh = _backend.jacobi_eigh
gram_schmidt_k = _backend.gram_schmidt_k
