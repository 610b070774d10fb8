import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from eisglm.errors import SingularAmplification
from eisglm.registry import get_method
from eisglm.stability import (
    a_stability_samples,
    amplification,
    amplification_poles,
    check_a_stability,
    real_axis_boundary,
    scan_region,
    spectral_radii,
    spectral_radius,
)

from conftest import EXPLICIT, IMPLICIT, METHODS


def _rho_pencil(tab, z):
    """Second route: eigenvalues of the pencil (D + zA + z^2 Ahat, I - zR - z^2 Rhat)."""
    I = np.eye(tab.s)
    num = tab.D + z * tab.A + z * z * tab.Ahat
    den = I - z * tab.R - z * z * tab.Rhat
    return float(np.max(np.abs(scipy.linalg.eigvals(num, den))))


@pytest.mark.parametrize("tab", METHODS, ids=lambda t: t.name)
def test_amplification_at_zero_is_d(tab):
    assert np.array_equal(amplification(tab, 0.0), tab.D.astype(complex))
    assert abs(spectral_radius(tab, 0.0) - 1.0) <= 1e-10


@pytest.mark.parametrize("tab", METHODS, ids=lambda t: t.name)
def test_spectral_radius_matches_pencil_route(tab):
    rng = np.random.default_rng(17)
    zs = rng.uniform(-3, 1, 50) + 1j * rng.uniform(-3, 3, 50)
    batched = spectral_radii(tab, zs)
    for z, r in zip(zs, batched):
        assert abs(r - _rho_pencil(tab, z)) <= 1e-10 * max(1.0, r)
        assert abs(r - spectral_radius(tab, z)) <= 1e-12 * max(1.0, r)


@given(re=st.floats(-5, 5), im=st.floats(-5, 5), k=st.integers(0, len(METHODS) - 1))
def test_conjugate_symmetry(re, im, k):
    tab = METHODS[k]
    z = complex(re, im)
    try:
        a, b = spectral_radius(tab, z), spectral_radius(tab, z.conjugate())
    except SingularAmplification:
        return
    assert abs(a - b) <= 1e-12 * max(1.0, a)


@pytest.mark.parametrize("tab", EXPLICIT, ids=lambda t: t.name)
def test_real_boundary_agrees_with_dense_sampling(tab):
    x = real_axis_boundary(tab)
    xs = np.linspace(0.0, -2.0 * tab.s, 200001)
    rho = spectral_radii(tab, xs)
    first_bad = xs[np.argmax(rho > 1.0 + 1e-12)]
    assert abs(x - first_bad) <= 2 * (xs[0] - xs[1])
    assert spectral_radius(tab, 0.9 * x) <= 1.0 + 1e-12


def test_forward_euler_like_boundary_value():
    # eEIS(2,3)_2 sits well inside the unit disk at z = -1
    assert abs(spectral_radius(get_method("eEIS(2,3)_2"), -1.0) - 0.348) < 5e-3


@pytest.mark.parametrize("tab", EXPLICIT, ids=lambda t: t.name)
def test_explicit_methods_are_not_a_stable(tab):
    rep = check_a_stability(tab, a_stability_samples(n_radial=20, n_angle=20, n_axis=40))
    assert not rep.passed
    assert rep.violations
    assert len(rep.poles) == 0


@pytest.mark.parametrize("tab", IMPLICIT, ids=lambda t: t.name)
def test_sampled_a_stability_has_no_violations(tab):
    rep = check_a_stability(tab)
    assert rep.n_samples == 200 * 200 + 400
    assert rep.passed
    assert rep.max_rho <= 1.0 + 1e-9


@pytest.mark.parametrize("tab", IMPLICIT, ids=lambda t: t.name)
def test_poles_on_negative_real_axis(tab):
    """The implicit tableaux have a real pole in the left half plane; rho > 1 next to it.

    The band is narrower than the sampled grid spacing, so sampling alone misses it.
    """
    poles = amplification_poles(tab)
    left = poles[poles.real < 0]
    assert left.size >= 1
    for z in left:
        den = np.eye(tab.s) - z * tab.R - z * z * tab.Rhat
        sv = np.linalg.svd(den, compute_uv=False)
        assert sv[-1] <= 1e-10 * sv[0]
    z = float(left[np.argmax(left.real)].real)
    assert spectral_radius(tab, z * (1 + 1e-6)) > 1.0
    with pytest.raises(SingularAmplification):
        amplification(tab, z)
    rep = check_a_stability(tab)
    assert not rep.pole_free


def test_pole_locations():
    p24 = amplification_poles(get_method("iEIS+(2,4)_2"))
    p35 = amplification_poles(get_method("iEIS+(3,5)_2"))
    assert np.min(np.abs(p24 - (-1.204178725188398))) <= 1e-9
    assert np.min(np.abs(p35 - (-0.21993397878080553))) <= 1e-9


@pytest.mark.parametrize("tab", EXPLICIT, ids=lambda t: t.name)
def test_explicit_methods_have_no_poles(tab):
    assert amplification_poles(tab).size == 0


def test_scan_region_default_window_and_csv():
    tab = get_method("eEIS+(4,8)_2")
    grid = scan_region(tab, nx=5, ny=3)
    assert grid.re_range == (-4.0, 4.0) and grid.im_range == (-4.0, 4.0)
    lines = grid.to_csv().splitlines()
    assert lines[0] == "re,im,rho,stable"
    assert len(lines) == 1 + 15
    re, im, rho, stable = lines[1].split(",")
    assert float(re) == -4.0 and float(im) == -4.0
    assert float(rho) == spectral_radius(tab, complex(-4.0, -4.0))
    assert stable in ("0", "1")
    # row-major over re, then im
    assert float(lines[2].split(",")[1]) == 0.0


def test_scan_region_marks_origin_neighbourhood_stable():
    grid = scan_region(get_method("eSSP-EIS(2,3)_2"), (-1.0, 0.0), (-0.5, 0.5), 11, 11)
    assert grid.stable[5, 5]  # z = -0.5
    assert not grid.stable[0, 0] or grid.rho[0, 0] <= 1.0 + 1e-12
