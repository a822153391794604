"""Kernel backend selection.

The compiled extension is preferred when importable; set EXAMGRID_PURE=1
to force the numpy fallback (the benchmark and parity tests do).
"""

from __future__ import annotations

import os

if os.environ.get("EXAMGRID_PURE"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
gaussian_fields = _impl.gaussian_fields
energy_eval = _impl.energy_eval
