import numpy as np
import pytest
from hypothesis import settings

from eisglm.registry import registry

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

METHODS = registry()
METHOD_NAMES = [t.name for t in METHODS]
EIS_PLUS = [t for t in METHODS if t.kind.value == "EIS+"]
EXPLICIT = [t for t in METHODS if t.family.is_explicit]
IMPLICIT = [t for t in METHODS if not t.family.is_explicit]
SSP = [t for t in METHODS if t.family.value == "ssp"]


def mp_vdp_reference(a=2, Tf=3, dps=30):
    """High-precision Taylor-series solution of Van der Pol (independent of the package)."""
    from mpmath import mp, mpf, odefun

    with mp.workdps(dps):
        f = odefun(lambda t, y: [y[1], a * (1 - y[0] ** 2) * y[1] - y[0]], 0, [mpf(2), mpf(0)])
        return np.array([float(v) for v in f(Tf)])


@pytest.fixture(scope="session")
def vdp_mp_ref():
    return mp_vdp_reference()


def tau_series_oracle(tab, jmax, dps=40):
    """Taylor coefficients of the one-step Dahlquist residual, in mpmath.

    Row j is the coefficient of z^j of
    D e^{z(c-1)} + z A e^{z(c-1)} + z^2 Ahat e^{z(c-1)} + z R e^{zc} + z^2 Rhat e^{zc} - e^{zc},
    i.e. tau_j by definition, computed without the closed-form expression.
    """
    import mpmath as mpm

    with mpm.workdps(dps):
        mats = {k: mpm.matrix(getattr(tab, k).tolist()) for k in ("D", "A", "Ahat", "R", "Rhat")}
        c = [mpm.mpf(float(x)) for x in tab.c]
        rows = []
        for i in range(tab.s):
            def f(z, i=i):
                tot = -mpm.exp(z * c[i])
                for j in range(tab.s):
                    tot += (mats["D"][i, j] + z * mats["A"][i, j] + z * z * mats["Ahat"][i, j]) * mpm.exp(z * (c[j] - 1))
                    tot += (z * mats["R"][i, j] + z * z * mats["Rhat"][i, j]) * mpm.exp(z * c[j])
                return tot
            rows.append([float(v) for v in mpm.taylor(f, 0, jmax)])
    return np.array(rows).T


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
