"""Dense convex QP kernel.

The compiled ``_qp_ext`` module is used when it was built; otherwise the
numpy implementation in ``_qp_py`` is used.  Set ``FOOTSTEP_MPCC_PURE=1``
to force the fallback.
"""

import os

from . import _qp_py
from ._qp_py import INFEASIBLE, MAX_ITER, NOT_CONVEX, OPTIMAL

python_solve_qp = _qp_py.solve_qp

try:
    from ._qp_ext import solve_qp as compiled_solve_qp
except ImportError:  # extension not built
    compiled_solve_qp = None

if compiled_solve_qp is not None and not os.environ.get("FOOTSTEP_MPCC_PURE"):
    solve_qp = compiled_solve_qp
    BACKEND = "cython"
else:
    solve_qp = python_solve_qp
    BACKEND = "python"

__all__ = [
    "solve_qp", "python_solve_qp", "compiled_solve_qp", "BACKEND",
    "OPTIMAL", "INFEASIBLE", "MAX_ITER", "NOT_CONVEX",
]
