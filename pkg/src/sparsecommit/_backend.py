"""Kernel selection: compiled extension if importable, numpy fallback otherwise.

Set ``SPARSECOMMIT_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

AVAILABLE = {"python": _kernel_py.simplex_iterate}
if _compiled is not None:
    AVAILABLE["compiled"] = _compiled.simplex_iterate

_requested = os.environ.get("SPARSECOMMIT_BACKEND", "").strip().lower()
if _requested and _requested not in AVAILABLE:
    raise ImportError(f"SPARSECOMMIT_BACKEND={_requested!r} is not available; have {sorted(AVAILABLE)}")
DEFAULT = _requested or ("compiled" if "compiled" in AVAILABLE else "python")


def get_kernel(name=None):
    if name is None:
        name = DEFAULT
    try:
        return AVAILABLE[name]
    except KeyError:
        raise ValueError(f"unknown simplex backend {name!r}; available: {sorted(AVAILABLE)}") from None
