"""Kernel backend selection.

Prefers the compiled extension, falling back to the numpy implementations
when it is not built. Set ``RULEENS_KERNELS=py`` or ``=cython`` to force a
backend (forcing cython raises if the extension is missing).
"""

from __future__ import annotations

import os

_forced = os.environ.get("RULEENS_KERNELS", "").strip().lower()

if _forced in ("py", "numpy", "python"):
    from . import _py as _impl
elif _forced == "cython":
    from . import _core as _impl  # noqa: F401  (ImportError here is intentional)
elif _forced:
    raise ValueError(f"unknown RULEENS_KERNELS value: {_forced!r} (use 'py' or 'cython')")
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _py as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND_NAME
scan_best_split = _impl.scan_best_split
eval_rules = _impl.eval_rules
cd_sweep = _impl.cd_sweep

__all__ = ["BACKEND", "scan_best_split", "eval_rules", "cd_sweep"]
