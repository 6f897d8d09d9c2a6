"""Backend selection for the hot numeric kernels.

The compiled extension (skylane._corekern) is preferred when importable; the
pure numpy/Python twin (skylane._purekern) is the fallback.  Set
SKYLANE_PURE=1 before import to force the fallback.  Both backends are kept
operation-identical, so results do not depend on which one is active.
"""

from __future__ import annotations

import os

from . import _purekern

_impl = _purekern
if os.environ.get("SKYLANE_PURE") != "1":
    try:
        from . import _corekern as _impl  # type: ignore[no-redef]
    except ImportError:
        pass


def backend_name() -> str:
    return "pure" if _impl is _purekern else "compiled"


FEAS_TOL = _purekern.FEAS_TOL
STATUS_OPTIMAL = _purekern.STATUS_OPTIMAL
STATUS_INFEASIBLE = _purekern.STATUS_INFEASIBLE
STATUS_BUDGET = _purekern.STATUS_BUDGET

segment_walls = _impl.segment_walls
bnb_search = _impl.bnb_search
