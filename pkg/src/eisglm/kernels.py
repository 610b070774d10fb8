"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``EISGLM_PURE_PYTHON=1`` to force the fallback. The compiled kernels
take float64 data only; complex or non-contiguous inputs are routed to the
fallback automatically.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_c = None
if os.environ.get("EISGLM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _c

        BACKEND = "cython"
    except ImportError:  # extension not built
        _c = None


def _real(*arrays):
    return all(a.dtype == np.float64 and a.flags.c_contiguous for a in arrays)


def explicit_step(D, A, Ahat, R, Rhat, V, FV, FdV, dt, F, Fdot):
    if _c is not None and _real(V, FV, FdV):
        return _c.explicit_step(D, A, Ahat, R, Rhat, V, FV, FdV, float(dt), F, Fdot)
    return _pykernels.explicit_step(D, A, Ahat, R, Rhat, V, FV, FdV, dt, F, Fdot)


def _grid(u):
    # the compiled periodic kernels peel the wrap-around and need a few points
    return _c is not None and u.ndim == 1 and u.shape[0] >= 4 and _real(u)


def upwind_F(u, dx):
    if _grid(u):
        return _c.upwind_F(u, float(dx))
    return _pykernels.upwind_F(u, dx)


def upwind_Fdot(u, dx):
    if _grid(u):
        return _c.upwind_Fdot(u, float(dx))
    return _pykernels.upwind_Fdot(u, dx)


def total_variation(u):
    u = np.asarray(u)
    if _grid(u):
        return _c.total_variation(u)
    return _pykernels.total_variation(u)
