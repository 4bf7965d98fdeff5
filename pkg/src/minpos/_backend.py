"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the pure
numpy kernels take over with identical contracts.  Set MINPOS_BACKEND to
"c" or "python" to force one side (forcing "c" fails loudly when the
extension was not built).
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("MINPOS_BACKEND", "").strip().lower()

if _requested == "python":
    kernels = _kernels_py
elif _requested == "c":
    from . import _kernels as kernels  # type: ignore[no-redef]
elif _requested == "":
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py
else:
    raise ImportError(
        f"MINPOS_BACKEND={_requested!r} is not recognized; use 'c' or 'python'"
    )


def active_backend() -> str:
    """Name of the kernel backend in use: 'c' (compiled) or 'python'."""
    return kernels.BACKEND_NAME
