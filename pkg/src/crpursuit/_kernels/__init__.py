"""Kernel backend selection.

The hot numeric paths (dual search, prefix optima, pursuit runs over packed
slot arrays) exist twice: a compiled Cython extension and a pure-Python twin
with identical semantics.  The compiled module is preferred when importable;
set ``CRPURSUIT_PURE=1`` to force the fallback (used by the equivalence tests
and the backend benchmark).
"""

import os

from . import _purecore

if os.environ.get("CRPURSUIT_PURE", "") not in ("", "0"):
    backend = _purecore
else:
    try:
        from . import _fastcore as backend  # type: ignore[no-redef]
    except ImportError:
        backend = _purecore

BACKEND_NAME = backend.NAME

dual_solve = backend.dual_solve
prefix_solve = backend.prefix_solve
pursuit_run = backend.pursuit_run
solve_value_slot = backend.solve_value_slot
