"""Convergence studies on Van der Pol and Dahlquist test problems."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import (InsufficientPoints, NewtonDivergence, NonFinite,
                     ReferenceUnconverged, SingularJacobian)
from .postproc import postprocess
from .registry import default_window, get_method
from .stepper import NewtonConfig, OdeProblem, integrate
from .tableau import Kind, MethodTableau

#: Slopes reported for Van der Pol (a=2, Tf=3), as (raw, post-processed).
PAPER_SLOPES = {
    "eEIS+(2,6)_2": (4.7, 5.8),
    "eEIS+(3,7)_2": (5.8, 6.6),
    "eEIS+(4,8)_2": (7.0, 7.7),
    "iEIS+(2,4)_2": (3.0, 4.0),
    "iEIS+(3,5)_2": (3.9, 5.0),
}

# Points below the guard sit on the double-precision roundoff floor (about
# 3e-14 for Van der Pol) and are dropped. Of the rest, only the tail within
# FIT_DECADES of the smallest error is fitted, which keeps the pre-asymptotic
# region of high order methods out of the slope.
FIT_WINDOW = (1e-12, 1e-1)
FIT_DECADES = 4.0
VDP_U0 = (2.0, 0.0)
VDP_TF = 3.0


def vdp_problem(a: float = 2.0, analytic_jacobians: bool = True) -> OdeProblem:
    """Van der Pol oscillator ``y1' = y2, y2' = a (1 - y1^2) y2 - y1``."""

    def F(y):
        y1, y2 = y
        return np.array([y2, a * (1.0 - y1 * y1) * y2 - y1])

    def jacF(y):
        y1, y2 = y
        return np.array([[0.0, 1.0], [-2.0 * a * y1 * y2 - 1.0, a * (1.0 - y1 * y1)]])

    def Fdot(y):
        y1, y2 = y
        f2 = a * (1.0 - y1 * y1) * y2 - y1
        return np.array([f2, (-2.0 * a * y1 * y2 - 1.0) * y2 + a * (1.0 - y1 * y1) * f2])

    def jacFdot(y):
        y1, y2 = y
        q = 1.0 - y1 * y1
        f2 = a * q * y2 - y1
        df2 = (-2.0 * a * y1 * y2 - 1.0, a * q)
        return np.array([
            [df2[0], df2[1]],
            [-2.0 * a * y2 * y2 - 2.0 * a * y1 * f2 + a * q * df2[0],
             -4.0 * a * y1 * y2 - 1.0 + a * q * df2[1]],
        ])

    if analytic_jacobians:
        return OdeProblem(2, F, Fdot, jacF, jacFdot)
    return OdeProblem(2, F, Fdot)


def dahlquist_problem(lam: complex, u0: complex = 1.0, t0: float = 0.0) -> OdeProblem:
    """``u' = lam u`` with its closed-form solution."""
    lam_c = complex(lam)
    real = lam_c.imag == 0 and np.isrealobj(u0)
    lam_v = lam_c.real if real else lam_c

    def exact(t):
        return np.array([u0 * np.exp(lam_v * (t - t0))])

    return OdeProblem(
        1,
        lambda u: lam_v * u,
        lambda u: lam_v * lam_v * u,
        lambda u: np.array([[lam_v]]),
        lambda u: np.array([[lam_v * lam_v]]),
        exact,
    )


def _run(problem, tableau, t0, u0, Tf, dt, m=1, postprocess_=False, newton_cfg=None):
    return integrate(problem, tableau, t0, u0, Tf, dt, window_m=m,
                     postprocess=postprocess_, newton_cfg=newton_cfg, startup="rk")


def reference_solution(problem: OdeProblem, t0: float, u0, Tf: float,
                       levels: int = 14, method: str = "eEIS+(4,8)_2") -> np.ndarray:
    """Two-resolution reference with ``dt = (Tf - t0) / 2^levels`` and half that.

    Warns when the two disagree by more than 1e-12 relative and raises
    ReferenceUnconverged beyond 1e-10.
    """
    u0 = np.asarray(u0, dtype=float)
    if Tf == t0:
        return u0.copy()
    tab = get_method(method)
    dt = (Tf - t0) / 2**levels
    coarse = _run(problem, tab, t0, u0, Tf, dt).final.values[0]
    fine = _run(problem, tab, t0, u0, Tf, dt / 2).final.values[0]
    rel = np.linalg.norm(fine - coarse) / max(np.linalg.norm(fine), 1e-300)
    if rel > 1e-10:
        raise ReferenceUnconverged(f"two-resolution disagreement {rel:.2e}")
    if rel > 1e-12:
        warnings.warn(f"reference certified only to {rel:.2e}", RuntimeWarning, stacklevel=2)
    return fine


@lru_cache(maxsize=8)
def vdp_reference(a: float = 2.0, Tf: float = VDP_TF) -> np.ndarray:
    ref = reference_solution(vdp_problem(a), 0.0, VDP_U0, Tf)
    ref.setflags(write=False)
    return ref


def fit_slope(dts, errors, window=FIT_WINDOW, decades=FIT_DECADES) -> tuple[float, int]:
    """Least-squares slope of log10(error) vs log10(dt) over the asymptotic tail.

    Keeps finite errors inside ``window``, then only those within ``decades``
    of the smallest kept error (``decades=None`` disables the tail cut).
    Returns ``(slope, points used)``.
    """
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors >= window[0]) & (errors <= window[1])
    if keep.any() and decades is not None:
        keep &= errors <= errors[keep].min() * 10.0**decades
    if keep.sum() < 3:
        raise InsufficientPoints(f"only {int(keep.sum())} points inside {window}")
    slope = np.polyfit(np.log10(dts[keep]), np.log10(errors[keep]), 1)[0]
    return float(slope), int(keep.sum())


@dataclass
class ConvergenceResult:
    method: str
    rows: list = field(default_factory=list)  # (dt, raw_error, post_error)
    slope_raw: Optional[float] = None
    slope_post: Optional[float] = None

    @property
    def paper(self):
        return PAPER_SLOPES.get(self.method, (None, None))


def default_dts(Tf: float, t0: float = 0.0, nmin: int = 16, octaves: int = 7,
                per_octave: int = 8) -> list:
    """``(Tf - t0) / N`` for N geometrically spaced from ``nmin`` over ``octaves``."""
    ns = sorted({int(round(nmin * 2.0 ** (k / per_octave))) for k in range(octaves * per_octave + 1)})
    return [(Tf - t0) / n for n in ns]


STEP_FAILURES = (NewtonDivergence, SingularJacobian, NonFinite)


def convergence_study(tableau: MethodTableau, problem: OdeProblem, Tf: float,
                      dt_list: Optional[Sequence[float]] = None, m: Optional[int] = None,
                      t0: float = 0.0, u0=VDP_U0, reference=None,
                      newton_cfg: Optional[NewtonConfig] = None,
                      skip_failures: bool = True) -> ConvergenceResult:
    """Errors at ``Tf`` of the raw and post-processed solutions for each ``dt``.

    Post-processing is applied to EIS+ methods only; EIS methods get
    ``post_error = nan``. With ``skip_failures`` a run that fails to solve
    (Newton divergence, overflow) at a coarse ``dt`` is recorded with nan
    errors and left out of the fit instead of aborting the study.
    """
    if dt_list is None:
        dt_list = default_dts(Tf, t0)
    dt_list = sorted((float(d) for d in dt_list), reverse=True)
    if reference is None:
        reference = reference_solution(problem, t0, u0, Tf)
    reference = np.asarray(reference)
    do_post = tableau.kind is Kind.EIS_PLUS
    m = m if m is not None else default_window(tableau)
    result = ConvergenceResult(tableau.name)
    for dt in dt_list:
        try:
            run = _run(problem, tableau, t0, u0, Tf, dt, m, do_post, newton_cfg)
        except STEP_FAILURES:
            if not skip_failures:
                raise
            result.rows.append((dt, math.nan, math.nan))
            continue
        raw = float(np.linalg.norm(run.final.values[0] - reference))
        post = math.nan
        if do_post:
            post = float(np.linalg.norm(postprocess(tableau, run.window).at_final - reference))
        result.rows.append((dt, raw, post))
    dts = [r[0] for r in result.rows]
    result.slope_raw, _ = fit_slope(dts, [r[1] for r in result.rows])
    if do_post:
        result.slope_post, _ = fit_slope(dts, [r[2] for r in result.rows])
    return result
