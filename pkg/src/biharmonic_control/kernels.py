"""Kernel backend selection.

The compiled extension is used when it was built; setting
``BIHARMONIC_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("BIHARMONIC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
expsum = _impl.expsum
cross_gram = _impl.cross_gram
rk4_drive = _impl.rk4_drive

__all__ = ["BACKEND", "expsum", "cross_gram", "rk4_drive"]
