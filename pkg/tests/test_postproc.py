import numpy as np
import pytest
from hypothesis import given, strategies as st

from eisglm.errors import DimensionMismatch, InvalidWindow, SingularT
from eisglm.harness import vdp_problem, vdp_reference
from eisglm.postproc import apply_filter, build_filter, postprocess, scale_grid
from eisglm.registry import default_window, get_method
from eisglm.stepper import integrate

from conftest import EIS_PLUS


def _grid(tab, m, t0=1.0, dt=0.1):
    return np.concatenate([t0 + (k + tab.c) * dt for k in range(m)])


@pytest.mark.parametrize("tab", EIS_PLUS, ids=lambda t: t.name)
def test_projector_identities(tab):
    m = default_window(tab)
    f = build_filter(tab, _grid(tab, m), m)
    P = f.Phi
    assert np.max(np.abs(P @ P - P)) <= 1e-10 * f.norm_Phi ** 2
    assert np.max(np.abs(P @ f.tau_tilde)) <= 1e-11 * f.norm_Phi
    x = scale_grid(f.t_grid)
    for k in range(f.ms - 1):
        q = x ** k
        assert np.max(np.abs(P @ q - q)) <= 1e-10 * f.norm_Phi


@pytest.mark.parametrize("tab", EIS_PLUS, ids=lambda t: t.name)
def test_filter_matches_explicit_inverse(tab):
    """Low-rank formula against T diag(0,1,...,1) T^{-1} formed with a plain inverse."""
    m = default_window(tab)
    f = build_filter(tab, _grid(tab, m), m)
    E = np.eye(f.ms)
    E[0, 0] = 0.0
    ref = f.T @ E @ np.linalg.inv(f.T)
    assert np.max(np.abs(f.Phi - ref)) <= 1e-8 * f.cond_T ** 0.5


def test_synthetic_error_is_removed():
    tab = get_method("eEIS+(3,7)_2")
    m = default_window(tab)
    t = _grid(tab, m, t0=0.3, dt=0.05)
    f = build_filter(tab, t, m)
    smooth = np.sin(t)
    polluted = smooth + 1e-3 * np.cos(t[-1]) * f.tau_tilde
    out = apply_filter(f, polluted).values[:, 0]
    # polynomial projection of sin over a window of width ~0.15 is accurate far below 1e-3
    assert np.max(np.abs(out - smooth)) <= 1e-9
    assert np.max(np.abs(polluted - smooth)) >= 1e-5


@given(shift=st.floats(-50, 50), scale=st.floats(1e-3, 10.0))
def test_filter_invariant_under_affine_time_change(shift, scale):
    tab = get_method("eSSP-EIS+(2,4)_2")
    m = default_window(tab)
    base = build_filter(tab, _grid(tab, m, 0.0, 1.0), m)
    moved = build_filter(tab, shift + scale * _grid(tab, m, 0.0, 1.0), m)
    assert np.max(np.abs(base.Phi - moved.Phi)) <= 1e-9 * base.norm_Phi


def test_repeated_times_are_singular():
    tab = get_method("eEIS+(2,5)_2")
    m = default_window(tab)
    t = _grid(tab, m)
    t[3] = t[2]
    with pytest.raises(SingularT):
        build_filter(tab, t, m)


def test_dimension_and_window_errors():
    tab = get_method("eEIS+(2,5)_2")
    m = default_window(tab)
    with pytest.raises(DimensionMismatch):
        build_filter(tab, _grid(tab, m)[:-1], m)
    with pytest.raises(InvalidWindow):
        build_filter(tab, _grid(tab, 2), 2)
    f = build_filter(tab, _grid(tab, m), m)
    with pytest.raises(DimensionMismatch):
        apply_filter(f, np.zeros((f.ms + 1, 2)))


def test_filter_is_read_only():
    tab = get_method("eEIS+(2,5)_2")
    m = default_window(tab)
    f = build_filter(tab, _grid(tab, m), m)
    with pytest.raises(ValueError):
        f.Phi[0, 0] = 1.0


@pytest.mark.parametrize("name,n", [("eEIS+(2,6)_2", 1024), ("iEIS+(2,4)_2", 256)])
def test_post_processing_reduces_van_der_pol_error(name, n):
    # the gain is asymptotic: at coarse dt the filtered error can be larger
    tab = get_method(name)
    ref = vdp_reference()
    res = integrate(vdp_problem(), tab, 0.0, np.array([2.0, 0.0]), 3.0, 3.0 / n,
                    window_m=default_window(tab), startup="rk")
    raw = np.max(np.abs(res.final.values[0] - ref))
    post = np.max(np.abs(postprocess(tab, res.window).at_final - ref))
    assert post < raw / 3
