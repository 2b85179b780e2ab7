"""Numerical kernel backend selection.

The compiled Cython module is used when available; otherwise the NumPy
twin takes over. Set ``PPDEPTH_BACKEND=numpy`` or ``PPDEPTH_BACKEND=compiled``
to force a choice (forcing ``compiled`` raises if the extension is missing).
"""
from __future__ import annotations

import os

_forced = os.environ.get("PPDEPTH_BACKEND", "").strip().lower()

if _forced == "numpy":
    from . import _numpy_backend as _impl
elif _forced == "compiled":
    from . import _fastkernels as _impl  # type: ignore[no-redef]
elif _forced:
    raise ImportError(f"unknown PPDEPTH_BACKEND value: {_forced!r} (use 'numpy' or 'compiled')")
else:
    try:
        from . import _fastkernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _numpy_backend as _impl

cross_integral = _impl.cross_integral
point_cross_sum = _impl.point_cross_sum
gram_sum = _impl.gram_sum
g_pair = _impl.g_pair
g_rowsums = _impl.g_rowsums
curve_values = _impl.curve_values


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'numpy'."""
    return _impl.NAME
