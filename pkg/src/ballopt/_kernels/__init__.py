"""Hot-kernel dispatch: compiled extension when available, NumPy fallback otherwise.

Set ``BALLOPT_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by tests that compare both implementations).
"""

from __future__ import annotations

import os

from . import fallback

if os.environ.get("BALLOPT_PURE_PYTHON"):
    _impl = fallback
    COMPILED = False
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        _impl = fallback
        COMPILED = False

chamfer_distance = _impl.chamfer_distance
banded_ldl_neg_count = _impl.banded_ldl_neg_count

__all__ = ["chamfer_distance", "banded_ldl_neg_count", "COMPILED", "fallback"]
