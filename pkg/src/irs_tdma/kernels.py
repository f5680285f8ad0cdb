"""Kernel backend selection.

The compiled ``_core`` extension is used when it was built; otherwise the
numpy fallback in ``_core_py`` is loaded. Set ``IRS_TDMA_PURE_PYTHON=1`` to
force the fallback.
"""
import os

from . import _core_py

if os.environ.get("IRS_TDMA_PURE_PYTHON", "") not in ("", "0"):
    _impl = _core_py
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _core_py

BACKEND = "python" if _impl is _core_py else "cython"

dominant_pair = _impl.dominant_pair
nearest_centroid = _impl.nearest_centroid
average_linkage = _impl.average_linkage
circular_resultant = _impl.circular_resultant


def available_backends():
    """Map backend name to kernel module for every backend that imports."""
    out = {"python": _core_py}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        out["cython"] = _core
    return out
