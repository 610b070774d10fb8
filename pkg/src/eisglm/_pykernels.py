"""Pure-Python (numpy) versions of the hot kernels.

Signatures mirror ``_ckernels``; see ``eisglm.kernels`` for selection.
"""
import numpy as np


def explicit_step(D, A, Ahat, R, Rhat, V, FV, FdV, dt, F, Fdot):
    """One explicit stage sweep (``D`` is taken to have unit row sums).

    ``V``, ``FV``, ``FdV`` are ``(s, d)`` arrays for the current step.
    Returns the new ``(V, F(V), Fdot(V))`` triple.
    """
    s = V.shape[0]
    dt2 = dt * dt
    # rows of D sum to one: D V = V_1 + D (V - V_1), so O(1) values are rounded once
    base = D @ (V - V[0]) + dt * (A @ FV) + dt2 * (Ahat @ FdV)
    Vn = np.empty_like(V)
    Fn = np.empty_like(FV)
    Fdn = np.empty_like(FdV)
    for i in range(s):
        incr = base[i]
        if i:
            incr = incr + dt * (R[i, :i] @ Fn[:i]) + dt2 * (Rhat[i, :i] @ Fdn[:i])
        row = V[0] + incr
        Vn[i] = row
        Fn[i] = F(row)
        Fdn[i] = Fdot(row)
    return Vn, Fn, Fdn


def upwind_F(u, dx):
    return -(u - np.roll(u, 1)) / dx


def upwind_Fdot(u, dx):
    return (u - 2.0 * np.roll(u, 1) + np.roll(u, 2)) / (dx * dx)


def total_variation(u):
    u = np.asarray(u)
    return float(np.sum(np.abs(np.roll(u, -1) - u)))
