"""Total-variation behaviour of SSP tableaux on periodic linear advection.

``u_t + u_x = 0`` on ``[-1, 1]`` with first-order upwind differences for
both ``u_x`` and ``u_tt = u_xx``. The initial condition is a square wave,
and extra stage values are started from the exact (translated) solution.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .postproc import apply_filter, filter_for_window
from .registry import default_window
from .stepper import OdeProblem, SolutionWindow, StageVector, step_explicit
from .tableau import Family, Kind, MethodTableau

RISE_TOL = 1e-12
THRESHOLD_RISE = 1e-8


@dataclass(frozen=True)
class AdvectionSetup:
    N: int = 200
    lam: float = 1.0  # dt / dx
    steps: int = 10

    def __post_init__(self):
        if self.N < 4:
            raise ValueError("need at least 4 grid points")
        if not self.lam > 0:
            raise ValueError("CFL number must be positive")
        if self.steps < 1:
            raise ValueError("need at least one step")

    @property
    def dx(self) -> float:
        return 2.0 / self.N

    @property
    def dt(self) -> float:
        return self.lam * self.dx

    @property
    def x(self) -> np.ndarray:
        return -1.0 + 2.0 * np.arange(self.N) / self.N


def upwind_F(u, dx):
    return kernels.upwind_F(np.ascontiguousarray(u, dtype=float), dx)


def upwind_Fdot(u, dx):
    return kernels.upwind_Fdot(np.ascontiguousarray(u, dtype=float), dx)


def total_variation(u) -> float:
    """Periodic ``sum |u_{j+1} - u_j|`` including the wrap-around term."""
    return float(kernels.total_variation(np.ascontiguousarray(u, dtype=float)))


def square_wave(x) -> np.ndarray:
    """0 on ``[0, 1/2]`` and 1 elsewhere in ``[-1, 1)``, extended with period 2."""
    xp = np.mod(np.asarray(x, dtype=float) + 1.0, 2.0) - 1.0
    return np.where((xp >= 0.0) & (xp <= 0.5), 0.0, 1.0)


def step_initial(N: int) -> np.ndarray:
    if N < 4:
        raise ValueError("need at least 4 grid points")
    return square_wave(-1.0 + 2.0 * np.arange(N) / N)


def advection_problem(setup: AdvectionSetup) -> OdeProblem:
    dx = setup.dx
    return OdeProblem(setup.N, lambda u: upwind_F(u, dx), lambda u: upwind_Fdot(u, dx))


def exact_start(tableau: MethodTableau, setup: AdvectionSetup, profile=square_wave) -> StageVector:
    """``V^0`` with block ``j`` the profile translated by ``c_j dt``.

    ``profile`` maps positions to initial values and must be 2-periodic.
    """
    V = np.array([profile(setup.x - cj * setup.dt) for cj in tableau.c], dtype=float)
    return StageVector(0, 0.0, setup.dt, np.ascontiguousarray(V))


@dataclass
class AdvectionRun:
    tv: np.ndarray  # TV of the c_1 = 0 block after each step, starting at step 0
    window: SolutionWindow
    final: StageVector

    @property
    def max_rise(self) -> float:
        return float(max(0.0, np.max(np.diff(self.tv))))


def run_advection(tableau: MethodTableau, setup: AdvectionSetup, m: int = 1,
                  profile=square_wave) -> AdvectionRun:
    if not tableau.family.is_explicit:
        raise ValueError("the advection study runs explicit tableaux only")
    if tableau.family is not Family.EXPLICIT_SSP:
        warnings.warn(f"{tableau.name} is not an SSP method", RuntimeWarning, stacklevel=2)
    problem = advection_problem(setup)
    V = exact_start(tableau, setup, profile)
    window = SolutionWindow(m)
    window.push(V)
    tv = [total_variation(V.values[0])]
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(setup.steps):
            V = step_explicit(problem, tableau, V)
            window.push(V)
            tv.append(total_variation(V.values[0]))
    return AdvectionRun(np.array(tv), window, V)


def max_tv_rise(tableau: MethodTableau, setup: AdvectionSetup) -> float:
    """``max_n max(0, TV(u^{n+1}) - TV(u^n))`` over the run."""
    return run_advection(tableau, setup).max_rise


def _gap(tableau, run) -> float:
    filt = filter_for_window(tableau, run.window)
    with np.errstate(over="ignore", invalid="ignore"):
        post = apply_filter(filt, run.window).at_final
    return total_variation(run.final.values[0]) - total_variation(post)


def tv_postproc_gap(tableau: MethodTableau, setup: AdvectionSetup, m: Optional[int] = None,
                    profile=square_wave) -> float:
    """``TV(u^n) - TV(post-processed u^n)`` at the final step.

    The filter acts along the time window separately at each grid point.
    """
    if tableau.kind is not Kind.EIS_PLUS:
        raise ValueError(f"{tableau.name} is not an EIS+ method")
    m = default_window(tableau) if m is None else m
    return _gap(tableau, run_advection(tableau, setup, m, profile))


def lambda_grid(top: float, n: int = 40) -> np.ndarray:
    """``n`` equispaced CFL numbers in ``(0, top]``."""
    return top * np.arange(1, n + 1) / n


def tv_rise_threshold(tableau: MethodTableau, N: int = 200, steps: int = 10,
                      lam_max: float = 4.0, scan: int = 400, tol: float = 1e-10,
                      level: float = THRESHOLD_RISE) -> float:
    """Smallest CFL number where the TV rise exceeds ``level``.

    Scans ``(0, lam_max]`` for the first offending value, then bisects
    between it and the last good one. Returns ``inf`` if none is found.
    """
    def rise(lam):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                r = max_tv_rise(tableau, AdvectionSetup(N, lam, steps))
            except Exception:  # overflow into non-finite values
                return math.inf
        return r if math.isfinite(r) else math.inf

    lams = lambda_grid(lam_max, scan)
    prev = 0.0
    for lam in lams:
        if rise(lam) > level:
            lo, hi = prev, lam
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if rise(mid) > level:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev = lam
    return math.inf


@dataclass
class SspRow:
    lam: float
    max_tv_rise: float
    tv_postproc_gap: float


def ssp_study(tableau: MethodTableau, lambdas: Sequence[float], N: int = 200,
              steps: int = 10, m: Optional[int] = None) -> list:
    """Rise and post-processing gap for each CFL number (gap is nan for EIS methods)."""
    rows = []
    for lam in lambdas:
        setup = AdvectionSetup(N, float(lam), steps)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            if tableau.kind is Kind.EIS_PLUS:
                run = run_advection(tableau, setup, default_window(tableau) if m is None else m)
                gap = _gap(tableau, run)
            else:
                run = run_advection(tableau, setup)
                gap = math.nan
        rows.append(SspRow(float(lam), run.max_rise, gap))
    return rows


def ssp_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "max_tv_rise", "tv_postproc_gap"])
    for r in rows:
        w.writerow([format(r.lam, ".17g"), format(r.max_tv_rise, ".17g"),
                    format(r.tv_postproc_gap, ".17g")])
    return buf.getvalue()
