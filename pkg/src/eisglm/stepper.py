"""Time stepping with a :class:`~eisglm.tableau.MethodTableau`.

States are handled blockwise: a stage vector is an ``(s, d)`` array whose
row ``j`` approximates ``u(t_n + c_j dt)``. Coefficient matrices act on the
stage axis only.
"""
from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import (
    InvalidWindow,
    NewtonDivergence,
    NonFinite,
    SingularJacobian,
    StartupFailure,
)
from .tableau import Family, MethodTableau

MAX_STARTUP_SUBSTEPS = 2**24


@dataclass
class OdeProblem:
    """Autonomous system ``u' = F(u)`` with ``Fdot(u) = J_F(u) F(u)``."""

    d: int
    F: Callable[[np.ndarray], np.ndarray]
    Fdot: Callable[[np.ndarray], np.ndarray]
    jacF: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jacFdot: Optional[Callable[[np.ndarray], np.ndarray]] = None
    exact: Optional[Callable[[float], np.ndarray]] = None


@dataclass
class StageVector:
    n: int
    t_base: float
    dt: float
    values: np.ndarray
    # F / Fdot at ``values``; filled lazily and reused by the next step
    f: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    fdot: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def s(self) -> int:
        return self.values.shape[0]

    def times(self, c: np.ndarray) -> np.ndarray:
        return self.t_base + np.asarray(c) * self.dt

    def evaluate(self, problem: OdeProblem):
        if self.f is None:
            self.f = np.array([problem.F(v) for v in self.values])
            self.fdot = np.array([problem.Fdot(v) for v in self.values])
        return self.f, self.fdot


class SolutionWindow:
    """The most recent ``capacity`` stage vectors, oldest first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise InvalidWindow("window capacity must be positive")
        self.capacity = capacity
        self._items: deque = deque(maxlen=capacity)

    def push(self, v: StageVector) -> None:
        if self._items and v.n != self._items[-1].n + 1:
            raise InvalidWindow("window entries must have consecutive step indices")
        self._items.append(v)

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __getitem__(self, k) -> StageVector:
        return list(self._items)[k]

    @property
    def vectors(self) -> list:
        return list(self._items)

    def time_grid(self, c) -> np.ndarray:
        return np.concatenate([v.times(c) for v in self._items])

    def stacked(self) -> np.ndarray:
        """``(m*s, d)`` array of all stage values, oldest step first."""
        return np.concatenate([v.values for v in self._items], axis=0)


@dataclass
class NewtonConfig:
    tol: float = 1e-13
    max_iter: int = 25
    threads: Optional[int] = None  # None: read EISGLM_THREADS


def _thread_count(cfg_threads):
    if cfg_threads is not None:
        return cfg_threads
    try:
        return int(os.environ.get("EISGLM_THREADS", "0"))
    except ValueError:
        return 0


# -- startup -----------------------------------------------------------------


def _taylor_substeps(h_total: float, dt: float, P: int) -> int:
    target = dt ** (P + 2)
    n = 1
    while (h_total / n) ** 3 * n > target:
        n *= 2
        if n > MAX_STARTUP_SUBSTEPS:
            raise StartupFailure(
                f"Taylor startup needs more than 2^24 substeps to reach {target:.2e}; "
                "supply problem.exact or startup='rk'"
            )
    return n


def taylor_startup(problem: OdeProblem, u0, h_total: float, dt: float, P: int) -> np.ndarray:
    """Advance ``u0`` by ``h_total`` with refined two-derivative Taylor steps."""
    n = _taylor_substeps(h_total, dt, P)
    h = h_total / n
    u = np.array(u0, dtype=np.result_type(u0, float))
    for _ in range(n):
        u = u + h * problem.F(u) + 0.5 * h * h * problem.Fdot(u)
    return u


def rk_startup(problem: OdeProblem, u0, h_total: float, dt=None, P=None) -> np.ndarray:
    """Advance ``u0`` by ``h_total`` with DOP853 at tight tolerances."""
    from scipy.integrate import solve_ivp

    u0 = np.asarray(u0)
    if np.iscomplexobj(u0):
        d = u0.size
        sol = rk_startup(
            OdeProblem(
                2 * d,
                lambda w: _realify(problem.F(w[:d] + 1j * w[d:])),
                lambda w: _realify(problem.Fdot(w[:d] + 1j * w[d:])),
            ),
            _realify(u0), h_total,
        )
        return sol[:d] + 1j * sol[d:]
    sol = solve_ivp(
        lambda t, y: problem.F(y), (0.0, h_total), u0.astype(float),
        method="DOP853", rtol=3e-14, atol=1e-16,
    )
    if not sol.success:
        raise StartupFailure(sol.message)
    return sol.y[:, -1]


def _realify(z):
    z = np.asarray(z)
    return np.concatenate([z.real, z.imag])


STARTUPS = {"taylor": taylor_startup, "rk": rk_startup}


def initialize(problem: OdeProblem, tableau: MethodTableau, t0: float, u0, dt: float,
               startup="taylor") -> StageVector:
    """Build ``V^0``: block 1 is ``u0``, later blocks are accurate samples at ``t0 + c_j dt``.

    Uses ``problem.exact`` when available, otherwise the ``startup``
    integrator (``"taylor"``, ``"rk"`` or a callable with the
    ``taylor_startup`` signature).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    u0 = np.asarray(u0)
    dtype = np.result_type(u0, float)
    V = np.empty((tableau.s, u0.size), dtype=dtype)
    V[0] = u0
    advance = STARTUPS[startup] if isinstance(startup, str) else startup
    for j in range(1, tableau.s):
        cj = tableau.c[j]
        if problem.exact is not None:
            V[j] = problem.exact(t0 + cj * dt)
        elif cj == 0.0:
            V[j] = u0
        else:
            V[j] = advance(problem, u0, cj * dt, dt, tableau.P)
    return StageVector(0, t0, dt, V)


# -- steps -------------------------------------------------------------------


def _combine_explicit(tableau, V, fv, fdv, dt):
    """``D V + dt A F + dt^2 Ahat Fdot`` in increment form about block 1.

    Rows of ``D`` sum to one, so ``D V = V_1 + D (V - V_1)``. This keeps
    the printed coefficients' row-sum defect (a few ulps) from entering as a
    per-step drift of the solution, and rounds the O(1) value only once.
    """
    return V[0] + (tableau.D @ (V - V[0]) + dt * (tableau.A @ fv) + dt * dt * (tableau.Ahat @ fdv))


def _check_finite(values):
    if not np.all(np.isfinite(values)):
        raise NonFinite("stage values became non-finite")


def step_explicit(problem: OdeProblem, tableau: MethodTableau, V: StageVector) -> StageVector:
    if not tableau.family.is_explicit:
        raise ValueError(f"{tableau.name} is implicit; use step_implicit")
    fv, fdv = V.evaluate(problem)
    Vn, Fn, Fdn = kernels.explicit_step(
        tableau.D, tableau.A, tableau.Ahat, tableau.R, tableau.Rhat,
        V.values, fv, fdv, V.dt, problem.F, problem.Fdot,
    )
    _check_finite(Vn)
    return StageVector(V.n + 1, V.t_base + V.dt, V.dt, Vn, Fn, Fdn)


def _fd_jacobian(fun, v):
    eps = np.sqrt(np.finfo(float).eps) * (1.0 + np.max(np.abs(v)))
    d = v.size
    J = np.empty((d, d), dtype=np.result_type(v, float))
    for k in range(d):
        e = np.zeros(d)
        e[k] = eps
        J[:, k] = (fun(v + e) - fun(v - e)) / (2 * eps)
    return J


def _newton_stage(problem, r, rh, b, guess, dt, cfg):
    """Solve ``v - dt r F(v) - dt^2 rh Fdot(v) = b``."""
    dt2 = dt * dt
    jacF = problem.jacF or (lambda v: _fd_jacobian(problem.F, v))
    jacFdot = problem.jacFdot or (lambda v: _fd_jacobian(problem.Fdot, v))
    eye = np.eye(b.size)
    v = guess.copy()
    for _ in range(cfg.max_iter + 1):
        f = problem.F(v)
        fd = problem.Fdot(v)
        t1 = dt * r * f
        t2 = dt2 * rh * fd
        g = v - t1 - t2 - b
        scale = np.max(np.abs(v)) + np.max(np.abs(t1)) + np.max(np.abs(t2)) + np.max(np.abs(b))
        if not np.all(np.isfinite(g)):
            break
        if np.max(np.abs(g)) <= cfg.tol * max(1.0, scale):
            return v, f, fd
        J = eye - dt * r * jacF(v) - dt2 * rh * jacFdot(v)
        try:
            delta = np.linalg.solve(J, g)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("Newton update is non-finite")
        v = v - delta
    raise NewtonDivergence(f"Newton did not reach tol {cfg.tol:g} in {cfg.max_iter} iterations")


def step_implicit(problem: OdeProblem, tableau: MethodTableau, V: StageVector,
                  newton_cfg: Optional[NewtonConfig] = None,
                  stage_order=None) -> StageVector:
    """One step of a method with diagonal ``R`` and ``Rhat``.

    Stages are decoupled, so each is an independent Newton solve; they may
    run concurrently when ``EISGLM_THREADS`` (or ``newton_cfg.threads``) > 0.
    """
    cfg = newton_cfg or NewtonConfig()
    s = tableau.s
    off = ~np.eye(s, dtype=bool)
    if np.any(tableau.R[off] != 0) or np.any(tableau.Rhat[off] != 0):
        raise ValueError("step_implicit requires diagonal R and Rhat")
    dt = V.dt
    fv, fdv = V.evaluate(problem)
    B = _combine_explicit(tableau, V.values, fv, fdv, dt)

    def solve(i):
        vi = V.values[i]
        guess = vi + dt * fv[i] + 0.5 * dt * dt * fdv[i]
        r, rh = tableau.R[i, i], tableau.Rhat[i, i]
        if r == 0.0 and rh == 0.0:
            return B[i], problem.F(B[i]), problem.Fdot(B[i])
        return _newton_stage(problem, r, rh, B[i], guess, dt, cfg)

    order = list(range(s)) if stage_order is None else list(stage_order)
    threads = _thread_count(cfg.threads)
    if threads > 0 and s > 1:
        with ThreadPoolExecutor(max_workers=min(threads, s)) as pool:
            results = dict(zip(order, pool.map(solve, order)))
    else:
        results = {i: solve(i) for i in order}
    Vn = np.array([results[i][0] for i in range(s)])
    Fn = np.array([results[i][1] for i in range(s)])
    Fdn = np.array([results[i][2] for i in range(s)])
    _check_finite(Vn)
    return StageVector(V.n + 1, V.t_base + dt, dt, Vn, Fn, Fdn)


def step(problem, tableau, V, newton_cfg=None) -> StageVector:
    if tableau.family is Family.IMPLICIT:
        return step_implicit(problem, tableau, V, newton_cfg)
    return step_explicit(problem, tableau, V)


# -- driver ------------------------------------------------------------------


@dataclass
class IntegrationResult:
    final: StageVector
    window: SolutionWindow


def step_count(t0: float, Tf: float, dt: float) -> int:
    n = int(round((Tf - t0) / dt))
    if n < 0 or abs(n * dt - (Tf - t0)) > 1e-9 * max(1.0, abs(Tf - t0)):
        raise ValueError(f"dt={dt!r} does not divide the interval [{t0}, {Tf}]")
    return n


def integrate(problem: OdeProblem, tableau: MethodTableau, t0: float, u0, Tf: float,
              dt: float, window_m: int = 1, postprocess: bool = False,
              newton_cfg: Optional[NewtonConfig] = None, startup="taylor") -> IntegrationResult:
    """Run ``(Tf - t0) / dt`` steps from ``initialize``; keep the last ``window_m`` vectors."""
    if postprocess and window_m * tableau.s < tableau.p + 3:
        raise InvalidWindow(
            f"m*s = {window_m * tableau.s} < p+3 = {tableau.p + 3} for {tableau.name}"
        )
    n_steps = step_count(t0, Tf, dt)
    window = SolutionWindow(window_m)
    V = initialize(problem, tableau, t0, u0, dt, startup=startup)
    window.push(V)
    for n in range(1, n_steps + 1):
        V = step(problem, tableau, V, newton_cfg)
        V.t_base = Tf if n == n_steps else t0 + n * dt
        window.push(V)
    return IntegrationResult(V, window)
