"""Kernel backend selection: compiled extension if available, pure Python otherwise.

Set POINTSEG_PURE=1 to force the fallback (used by the parity tests and the
benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("POINTSEG_PURE") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

jbu_filter = _impl.jbu_filter
geodesic_fill = _impl.geodesic_fill
fused_area_scan = _impl.fused_area_scan
