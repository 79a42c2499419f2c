"""Voxel kernels: compiled extension when built, pure-Python otherwise.

Set ``FLAIRBASE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("FLAIRBASE_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ccore as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

label_components = _impl.label_components
sweep_components = _impl.sweep_components


def available_backends() -> dict:
    out = {"python": _pykernels}
    try:
        from . import _ccore
    except ImportError:
        pass
    else:
        out["cython"] = _ccore
    return out
