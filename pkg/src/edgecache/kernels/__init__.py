"""Distance-scan kernels with a compiled core and a pure-Python fallback.

The Cython extension is picked at import time when present; setting
``EDGECACHE_PURE_PYTHON=1`` in the environment forces the fallback
(used by the benchmark and the kernel-equivalence tests). Both
implementations are bit-identical by construction.
"""

import os

from . import _pykernels

if os.environ.get("EDGECACHE_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _distkernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

l2_distances = _impl.l2_distances
cosine_distances = _impl.cosine_distances
IMPLEMENTATION = _impl.IMPLEMENTATION

__all__ = ["l2_distances", "cosine_distances", "IMPLEMENTATION"]
