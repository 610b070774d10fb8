"""Post-processing filter that removes the leading error direction.

For an EIS+ method the global error is ``dt^(p+1) tau_(p+1)`` (per step,
times a smooth function of time) plus higher order terms. Over a window of
``m`` steps the filter projects the stacked solution onto polynomials of
degree ``m*s - 2`` along the stacked ``tau`` direction, which cancels that
term.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, IllConditioned, InvalidWindow, SingularT
from .stepper import SolutionWindow
from .tableau import MethodTableau, compute_tau

PIVOT_RATIO_MIN = 1e-14
COND_WARN = 1e12
NORM_WARN = 1e4


@dataclass(frozen=True)
class PostFilter:
    m: int
    ms: int
    T: np.ndarray
    Phi: np.ndarray
    cond_T: float
    norm_Phi: float
    tau_tilde: np.ndarray
    t_grid: np.ndarray
    final_index: int  # grid index of the last step's c_1 = 0 point


def scale_grid(t: np.ndarray) -> np.ndarray:
    """Affine map of ``t`` onto ``[-1, 1]``."""
    lo, hi = float(np.min(t)), float(np.max(t))
    if hi == lo:
        return np.zeros_like(t)
    return (2.0 * t - (lo + hi)) / (hi - lo)


def filter_direction(tableau: MethodTableau) -> np.ndarray:
    if tableau.stored_tau is not None:
        return np.asarray(tableau.stored_tau)
    return compute_tau(tableau, tableau.p + 1)


def build_filter(tableau: MethodTableau, t_grid, m: int, tau=None) -> PostFilter:
    """Assemble ``Phi = T diag(0, 1, ..., 1) T^{-1}``.

    ``T`` has columns ``(tau~, t^(ms-2), ..., t, 1)`` in the rescaled time.
    """
    s = tableau.s
    ms = m * s
    if ms < tableau.p + 3:
        raise InvalidWindow(f"m*s = {ms} < p+3 = {tableau.p + 3}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.shape != (ms,):
        raise DimensionMismatch(f"time grid must have {ms} points, got {t_grid.shape}")
    tau = filter_direction(tableau) if tau is None else np.asarray(tau, dtype=float)
    tau_tilde = np.tile(tau, m)

    if np.unique(t_grid).size != ms:
        # points are never merged; the caller picks m or a tableau without overlaps
        raise SingularT("time grid has coincident points")
    x = scale_grid(t_grid)
    T = np.empty((ms, ms))
    T[:, 0] = tau_tilde
    T[:, 1:] = np.vander(x, ms - 1)  # powers ms-2 .. 0

    lu, piv = scipy.linalg.lu_factor(T, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.max() == 0.0 or diag.min() / diag.max() < PIVOT_RATIO_MIN:
        raise SingularT("tau-augmented Vandermonde matrix is singular (coincident grid times?)")
    # T diag(0,1,...,1) T^{-1} = I - tau~ (e_1^T T^{-1})
    first_row = scipy.linalg.lu_solve((lu, piv), np.eye(ms)[0], trans=1)
    Phi = np.eye(ms) - np.outer(tau_tilde, first_row)

    cond_T = float(np.linalg.cond(T))
    norm_Phi = float(np.max(np.sum(np.abs(Phi), axis=1)))
    if cond_T > COND_WARN or norm_Phi > NORM_WARN:
        warnings.warn(
            f"post-processing filter ill-conditioned: cond(T)={cond_T:.2e}, "
            f"||Phi||_inf={norm_Phi:.2e}",
            IllConditioned,
            stacklevel=2,
        )
    for arr in (T, Phi, tau_tilde, t_grid):
        arr.setflags(write=False)
    return PostFilter(m, ms, T, Phi, cond_T, norm_Phi, tau_tilde, t_grid, (m - 1) * s)


def filter_for_window(tableau: MethodTableau, window: SolutionWindow) -> PostFilter:
    return build_filter(tableau, window.time_grid(tableau.c), len(window))


@dataclass
class FilteredSolution:
    values: np.ndarray  # (ms, d)
    at_final: np.ndarray  # (d,)


def apply_filter(filt: PostFilter, window) -> FilteredSolution:
    """Apply ``Phi`` across the time window, independently per component."""
    if isinstance(window, SolutionWindow):
        if len(window) != filt.m:
            raise DimensionMismatch(f"window holds {len(window)} steps, filter expects {filt.m}")
        stacked = window.stacked()
    else:
        stacked = np.asarray(window)
    if stacked.ndim == 1:
        stacked = stacked[:, None]
    if stacked.shape[0] != filt.ms:
        raise DimensionMismatch(f"stacked window has {stacked.shape[0]} rows, expected {filt.ms}")
    out = filt.Phi @ stacked
    return FilteredSolution(out, out[filt.final_index])


def postprocess(tableau: MethodTableau, window: SolutionWindow) -> FilteredSolution:
    return apply_filter(filter_for_window(tableau, window), window)
