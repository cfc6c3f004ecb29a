"""Kernel backend selection.

Prefers the compiled extension, falls back to the numpy implementation.
Set TELEKIN_PURE_PYTHON=1 to force the fallback (used by the equivalence
tests and the kernel benchmark).
"""

import os

if os.environ.get("TELEKIN_PURE_PYTHON"):
    from . import kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        from . import kernels_py as kernels
        BACKEND = "python"

fk_world = kernels.fk_world
frame_jacobian = kernels.frame_jacobian

__all__ = ["kernels", "BACKEND", "fk_world", "frame_jacobian"]
