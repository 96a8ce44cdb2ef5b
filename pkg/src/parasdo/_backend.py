"""Select the kernel implementation at import time.

The compiled extension is preferred.  Setting ``PARASDO_PURE=1`` in the
environment forces the pure-Python fallback.
"""
import os

from . import _kernels_py

if os.environ.get("PARASDO_PURE") == "1":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND


def available_backends():
    """Return ``{name: module}`` for every importable kernel backend."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
