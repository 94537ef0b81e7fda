"""Hot-loop kernels, compiled when available.

Set ``MOBILICAST_PURE_PYTHON=1`` to force the pure-Python implementations.
"""
import os

from . import _pykernels

IMPLEMENTATION = "python"
_impl = _pykernels
if not os.environ.get("MOBILICAST_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = _pykernels

levenshtein = _impl.levenshtein
nearest_distance = _impl.nearest_distance
ward_lance_williams = _impl.ward_lance_williams

__all__ = ["IMPLEMENTATION", "levenshtein", "nearest_distance", "ward_lance_williams"]
