"""Compiled vs numpy kernels, per call and end to end.

Run with ``python3 benchmarks/bench_kernels.py``. The end-to-end rows start
a fresh interpreter per backend so the import-time selection is exercised.
"""
import os
import subprocess
import sys
import timeit

import numpy as np

from eisglm import _pykernels
from eisglm.harness import vdp_problem
from eisglm.registry import get_method
from eisglm.sspharness import AdvectionSetup, advection_problem, exact_start

try:
    from eisglm import _ckernels
except ImportError:
    _ckernels = None


def _per_call(fn, number):
    best = min(timeit.repeat(fn, number=number, repeat=5))
    return best / number * 1e6


def step_case(tab, problem, V, dt):
    FV = np.array([problem.F(v) for v in V])
    FdV = np.array([problem.Fdot(v) for v in V])
    args = (tab.D, tab.A, tab.Ahat, tab.R, tab.Rhat, V, FV, FdV, dt, problem.F, problem.Fdot)
    return lambda mod: (lambda: mod.explicit_step(*args))


_E2E = """
import time, numpy as np
from eisglm.harness import vdp_problem
from eisglm.registry import get_method
from eisglm.stepper import integrate
from eisglm.sspharness import AdvectionSetup, run_advection
tab = get_method("eEIS+(3,7)_2")
t = time.perf_counter()
integrate(vdp_problem(), tab, 0.0, np.array([2.0, 0.0]), 3.0, 3.0 / 2048, startup="rk")
a = time.perf_counter() - t
t = time.perf_counter()
run_advection(get_method("eSSP-EIS+(3,6)_2"), AdvectionSetup(2000, 1.0, 200))
b = time.perf_counter() - t
print(a, b)
"""


def end_to_end(pure):
    env = dict(os.environ)
    env.pop("EISGLM_PURE_PYTHON", None)
    if pure:
        env["EISGLM_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    return float(out[0]), float(out[1])


def main():
    if _ckernels is None:
        print("compiled extension not built; nothing to compare")
        return
    rows = []
    tab = get_method("eEIS+(4,8)_2")
    vdp = vdp_problem()
    V = np.ascontiguousarray(np.tile([2.0, 0.0], (tab.s, 1)))
    case = step_case(tab, vdp, V, 1e-3)
    rows.append(("explicit_step, Van der Pol (d=2, s=4)", case(_pykernels), case(_ckernels), 2000))

    ssp = get_method("eSSP-EIS+(3,6)_2")
    for N in (200, 20000):
        setup = AdvectionSetup(N, 1.0, 1)
        adv = advection_problem(setup)
        V = exact_start(ssp, setup).values
        case = step_case(ssp, adv, V, setup.dt)
        rows.append((f"explicit_step, advection (d={N}, s=3)", case(_pykernels), case(_ckernels),
                     2000 if N == 200 else 50))

    u = np.ascontiguousarray(np.random.default_rng(0).normal(size=20000))
    rows.append(("upwind_Fdot (N=20000)", lambda: _pykernels.upwind_Fdot(u, 1e-4),
                 lambda: _ckernels.upwind_Fdot(u, 1e-4), 500))
    rows.append(("total_variation (N=20000)", lambda: _pykernels.total_variation(u),
                 lambda: _ckernels.total_variation(u), 500))

    print(f"{'kernel':44s} {'numpy us':>10s} {'cython us':>10s} {'speedup':>8s}")
    for name, py, cy, number in rows:
        tp, tc = _per_call(py, number), _per_call(cy, number)
        print(f"{name:44s} {tp:10.2f} {tc:10.2f} {tp / tc:8.2f}")

    pure, comp = end_to_end(True), end_to_end(False)
    print()
    print(f"{'end to end':44s} {'numpy s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for label, a, b in (("Van der Pol eEIS+(3,7)_2, 2048 steps", pure[0], comp[0]),
                        ("advection eSSP-EIS+(3,6)_2, N=2000, 200 steps", pure[1], comp[1])):
        print(f"{label:44s} {a:10.3f} {b:10.3f} {a / b:8.2f}")


if __name__ == "__main__":
    main()
