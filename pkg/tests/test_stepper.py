import numpy as np
import pytest
from hypothesis import given, strategies as st

from eisglm.errors import InvalidWindow, NewtonDivergence, NonFinite, StartupFailure
from eisglm.harness import dahlquist_problem, vdp_problem
from eisglm.registry import get_method
from eisglm.stability import amplification, spectral_radius
from eisglm.stepper import (
    NewtonConfig,
    OdeProblem,
    SolutionWindow,
    StageVector,
    initialize,
    integrate,
    step,
    step_explicit,
    step_implicit,
    taylor_startup,
)
from eisglm.tableau import compute_tau

from conftest import EXPLICIT, IMPLICIT, METHODS


def _zero_problem(d=1):
    return OdeProblem(d, lambda u: np.zeros_like(u), lambda u: np.zeros_like(u),
                      lambda u: np.zeros((d, d)), lambda u: np.zeros((d, d)))


@pytest.mark.parametrize("tab", METHODS, ids=lambda t: t.name)
def test_constant_state_is_fixed(tab):
    V = StageVector(0, 0.0, 0.1, np.full((tab.s, 3), 1.7))
    out = step(_zero_problem(3), tab, V)
    assert np.array_equal(out.values, V.values)


@pytest.mark.parametrize("tab", IMPLICIT, ids=lambda t: t.name)
def test_implicit_with_zero_rhs_is_d_times_v(tab):
    rng = np.random.default_rng(3)
    V = StageVector(0, 0.0, 0.1, rng.normal(size=(tab.s, 2)))
    out = step_implicit(_zero_problem(2), tab, V)
    assert np.allclose(out.values, tab.D @ V.values, atol=1e-15)


@pytest.mark.parametrize("tab", EXPLICIT, ids=lambda t: t.name)
def test_explicit_steps_match_amplification_powers(tab):
    """Complex Dahlquist runs go through the numpy kernel; real ones through the default."""
    rng = np.random.default_rng(11)
    s = tab.s
    for z in (-0.3 + 0.2j, -0.1, complex(-0.05, -0.4)):
        if spectral_radius(tab, z) > 1:
            continue
        dt = 0.1
        lam = z / dt
        prob = dahlquist_problem(lam)
        V0 = rng.normal(size=(s, 1)) + (1j * rng.normal(size=(s, 1)) if isinstance(lam, complex) and lam.imag else 0)
        V = StageVector(0, 0.0, dt, V0.astype(complex) if np.iscomplexobj(V0) or z.imag else V0)
        for _ in range(12):
            V = step_explicit(prob, tab, V)
        ref = np.linalg.matrix_power(amplification(tab, z), 12) @ V0
        assert np.linalg.norm(V.values - ref) <= 1e-12 * np.linalg.norm(ref)


@pytest.mark.parametrize("tab", IMPLICIT, ids=lambda t: t.name)
def test_implicit_steps_match_amplification_powers(tab):
    rng = np.random.default_rng(5)
    z, dt = -0.7, 0.1
    prob = dahlquist_problem(z / dt)
    V0 = rng.normal(size=(tab.s, 1))
    V = StageVector(0, 0.0, dt, V0)
    for _ in range(8):
        V = step_implicit(prob, tab, V)
    ref = np.linalg.matrix_power(amplification(tab, z), 8) @ V0
    assert np.linalg.norm(V.values - ref) <= 1e-11 * np.linalg.norm(ref)


@pytest.mark.parametrize("tab", METHODS, ids=lambda t: t.name)
def test_polynomials_of_degree_p_are_reproduced(tab):
    """u' = q'(t) written autonomously as (u, t); a degree-p solution is exact."""
    rng = np.random.default_rng(tab.s + tab.p)
    coef = rng.normal(size=tab.p + 1)
    q = np.polynomial.Polynomial(coef)
    dq, d2q = q.deriv(1), q.deriv(2)
    prob = OdeProblem(
        2,
        lambda y: np.array([dq(y[1]), 1.0]),
        lambda y: np.array([d2q(y[1]), 0.0]),
        lambda y: np.array([[0.0, d2q(y[1])], [0.0, 0.0]]),
        lambda y: np.array([[0.0, q.deriv(3)(y[1])], [0.0, 0.0]]),
        exact=lambda t: np.array([q(t), t]),
    )
    dt = 0.3
    V0 = initialize(prob, tab, 0.2, prob.exact(0.2), dt)
    V1 = step(prob, tab, V0, NewtonConfig(tol=1e-15))
    exact = np.array([prob.exact(0.2 + dt + cj * dt) for cj in tab.c])
    assert np.max(np.abs(V1.values - exact)) <= 1e-12 * max(1.0, np.max(np.abs(exact)))


@pytest.mark.parametrize("tab", IMPLICIT, ids=lambda t: t.name)
def test_implicit_stage_order_does_not_matter(tab):
    prob = vdp_problem()
    V = initialize(prob, tab, 0.0, np.array([2.0, 0.0]), 0.05, startup="rk")
    a = step_implicit(prob, tab, V)
    V.f = V.fdot = None
    b = step_implicit(prob, tab, V, stage_order=list(reversed(range(tab.s))))
    assert np.array_equal(a.values, b.values)


@pytest.mark.parametrize("tab", IMPLICIT, ids=lambda t: t.name)
def test_threaded_stages_are_bit_identical(tab):
    prob = vdp_problem()
    u0 = np.array([2.0, 0.0])
    serial = integrate(prob, tab, 0.0, u0, 0.5, 0.05, newton_cfg=NewtonConfig(threads=0), startup="rk")
    threaded = integrate(prob, tab, 0.0, u0, 0.5, 0.05, newton_cfg=NewtonConfig(threads=4), startup="rk")
    assert np.array_equal(serial.final.values, threaded.final.values)


@pytest.mark.parametrize("tab", IMPLICIT, ids=lambda t: t.name)
def test_implicit_stiff_run_is_bounded_and_decays(tab):
    # M(-1e6) is non-normal with rho < 1: a short transient, then decay
    prob = dahlquist_problem(-1e6)
    V = initialize(prob, tab, 0.0, np.array([1.0]), 1.0)
    M = amplification(tab, -1e6)
    V0 = V.values.copy()
    for k in range(1, 61):
        V = step_implicit(prob, tab, V)
        assert np.all(np.isfinite(V.values))
        ref = np.linalg.matrix_power(M, k) @ V0
        assert np.linalg.norm(V.values - ref) <= 1e-9 * (1 + np.linalg.norm(ref))
    assert np.linalg.norm(V.values) < 1e-2


def test_finite_difference_jacobians_agree_with_analytic():
    tab = get_method("iEIS+(3,5)_2")
    u0 = np.array([2.0, 0.0])
    a = integrate(vdp_problem(), tab, 0.0, u0, 1.0, 0.02, startup="rk").final.values
    b = integrate(vdp_problem(analytic_jacobians=False), tab, 0.0, u0, 1.0, 0.02,
                  startup="rk").final.values
    assert np.max(np.abs(a - b)) <= 1e-11


def test_newton_divergence_is_reported():
    tab = get_method("iEIS+(2,4)_2")
    prob = vdp_problem()
    V = initialize(prob, tab, 0.0, np.array([2.0, 0.0]), 0.5, startup="rk")
    with pytest.raises(NewtonDivergence):
        for _ in range(10):
            V = step_implicit(prob, tab, V, NewtonConfig(max_iter=1))


def test_explicit_overflow_is_non_finite():
    tab = get_method("eEIS(2,3)_2")
    prob = OdeProblem(1, lambda u: u * u * 1e200, lambda u: u ** 3 * 1e300)
    V = StageVector(0, 0.0, 1.0, np.full((2, 1), 1e100))
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(NonFinite):
        step_explicit(prob, tab, V)


def test_initialize_block_one_is_exact():
    tab = get_method("eEIS+(2,6)_2")
    u0 = np.array([2.0, 0.0])
    V = initialize(vdp_problem(), tab, 0.0, u0, 0.05, startup="rk")
    assert np.array_equal(V.values[0], u0)


def test_initialize_uses_exact_solution_when_given():
    tab = get_method("eEIS+(4,8)_2")
    prob = dahlquist_problem(-2.0, t0=0.5)
    V = initialize(prob, tab, 0.5, np.array([1.0]), 0.1)
    expected = np.exp(-2.0 * tab.c * 0.1)[:, None]
    assert np.allclose(V.values, expected, rtol=1e-15, atol=0)


def test_taylor_startup_meets_its_target():
    tab = get_method("eSSP-EIS(2,3)_2")  # c2 = 2/3, P = 3
    prob = OdeProblem(1, lambda u: u, lambda u: u)
    dt = 1e-2
    V = initialize(prob, tab, 0.0, np.array([1.0]), dt)
    assert abs(V.values[1, 0] - np.exp(2 / 3 * dt)) <= dt ** (tab.P + 2)


def test_taylor_startup_refuses_huge_substep_counts():
    prob = OdeProblem(1, lambda u: u, lambda u: u)
    with pytest.raises(StartupFailure):
        taylor_startup(prob, np.array([1.0]), 1e-3, 1e-3, 8)


def test_rk_startup_handles_complex_states():
    tab = get_method("eEIS(2,3)_2")
    lam = -1.0 + 2.0j
    prob = dahlquist_problem(lam)
    prob.exact = None
    V = initialize(prob, tab, 0.0, np.array([1.0 + 0j]), 0.1, startup="rk")
    assert abs(V.values[1, 0] - np.exp(lam * tab.c[1] * 0.1)) <= 1e-13


def test_window_keeps_last_m_vectors():
    tab = get_method("eEIS+(3,7)_2")
    res = integrate(vdp_problem(), tab, 0.0, np.array([2.0, 0.0]), 3.0, 0.1, window_m=3,
                    startup="rk")
    assert len(res.window) == 3
    assert [v.n for v in res.window] == [28, 29, 30]
    assert res.window.time_grid(tab.c).shape == (9,)
    assert res.final.t_base == 3.0


def test_empty_interval_returns_initialization():
    tab = get_method("eEIS(2,3)_2")
    res = integrate(dahlquist_problem(-1.0), tab, 1.0, np.array([1.0]), 1.0, 0.1, window_m=3)
    assert len(res.window) == 1
    assert res.final.n == 0


def test_window_requirement_for_post_processing():
    tab = get_method("eEIS+(2,6)_2")
    with pytest.raises(InvalidWindow):
        integrate(vdp_problem(), tab, 0.0, np.array([2.0, 0.0]), 1.0, 0.1, window_m=3,
                  postprocess=True)
    integrate(vdp_problem(), tab, 0.0, np.array([2.0, 0.0]), 1.0, 0.1, window_m=4,
              postprocess=True, startup="rk")


def test_window_rejects_gaps():
    w = SolutionWindow(2)
    w.push(StageVector(0, 0.0, 0.1, np.zeros((2, 1))))
    with pytest.raises(InvalidWindow):
        w.push(StageVector(2, 0.2, 0.1, np.zeros((2, 1))))


def test_dt_must_divide_interval():
    with pytest.raises(ValueError):
        integrate(dahlquist_problem(-1.0), get_method("eEIS(2,3)_2"), 0.0, np.array([1.0]),
                  1.0, 0.3)


@pytest.mark.parametrize("name", ["eEIS+(2,5)_2", "eSSP-EIS+(2,4)_2", "iEIS+(2,4)_2"])
def test_error_vector_aligns_with_leading_tau(name):
    """For EIS+ methods the global error approaches dt^{p+1} tau_{p+1} u^{(p+1)}."""
    tab = get_method(name)
    prob = dahlquist_problem(-1.0)
    tau = compute_tau(tab, tab.p + 1)
    angles = []
    for N in (10, 20, 40, 80):
        res = integrate(prob, tab, 0.0, np.array([1.0]), 1.0, 1.0 / N)
        exact = np.array([prob.exact(1.0 + cj / N)[0] for cj in tab.c])
        err = res.final.values[:, 0] - exact
        cos = abs(err @ tau) / (np.linalg.norm(err) * np.linalg.norm(tau))
        angles.append(np.arccos(min(1.0, cos)))
    angles = np.array(angles)
    assert np.all(np.diff(angles) < 0)
    assert np.all(angles[:-1] / angles[1:] > 1.7)  # first order in dt
    assert angles[-1] < 0.03


@given(re=st.floats(-1.0, 0.0), im=st.floats(-1.0, 1.0))
def test_linear_equivalence_random_z(re, im):
    tab = get_method("eSSP-EIS+(3,6)_2")
    z = complex(re, im)
    if spectral_radius(tab, z) > 1:
        return
    prob = dahlquist_problem(z / 0.2)
    V0 = np.linspace(1.0, 2.0, tab.s)[:, None].astype(complex)
    V = StageVector(0, 0.0, 0.2, V0)
    for _ in range(6):
        V = step_explicit(prob, tab, V)
    ref = np.linalg.matrix_power(amplification(tab, z), 6) @ V0
    assert np.linalg.norm(V.values - ref) <= 1e-12 * max(np.linalg.norm(ref), 1e-300) + 1e-300
