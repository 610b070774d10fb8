"""Linear stability of a tableau on the Dahlquist problem ``y' = lam y``.

With ``z = lam dt`` one step maps ``V^n`` to ``M(z) V^n`` where
``M(z) = (I - z R - z^2 Rhat)^{-1} (D + z A + z^2 Ahat)``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SingularAmplification
from .tableau import MethodTableau

STABLE_TOL = 1e-12
A_STABLE_TOL = 1e-9
POLE_RCOND = 1e-14


def amplification(tableau: MethodTableau, z: complex) -> np.ndarray:
    """``M(z)`` as an ``s x s`` complex matrix."""
    z = complex(z)
    eye = np.eye(tableau.s)
    lhs = eye - z * tableau.R - z * z * tableau.Rhat
    rhs = tableau.D + z * tableau.A + z * z * tableau.Ahat
    if tableau.family.is_explicit:
        return _unit_lower_solve(lhs[None], rhs[None].astype(complex))[0]
    sv = np.linalg.svd(lhs, compute_uv=False)
    if not np.isfinite(sv).all() or sv[-1] <= POLE_RCOND * sv[0]:
        raise SingularAmplification(f"I - zR - z^2 Rhat is singular at z = {z}")
    return np.linalg.solve(lhs, rhs)


def spectral_radius(tableau: MethodTableau, z: complex) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(amplification(tableau, z)))))


def _unit_lower_solve(L, B):
    X = np.empty_like(B)
    for i in range(L.shape[1]):
        X[:, i] = B[:, i] - np.einsum("kj,kjl->kl", L[:, i, :i], X[:, :i])
    return X


def spectral_radii(tableau: MethodTableau, z) -> np.ndarray:
    """Vectorized ``rho(M(z))`` over an array of ``z``; poles give ``inf``."""
    z = np.asarray(z, dtype=complex)
    zf = z.reshape(-1, 1, 1)
    eye = np.eye(tableau.s)
    lhs = eye - zf * tableau.R - zf * zf * tableau.Rhat
    rhs = tableau.D + zf * tableau.A + zf * zf * tableau.Ahat
    rho = np.full(zf.shape[0], np.inf)
    if tableau.family.is_explicit:
        # unit lower triangular: forward substitution, since pivoting can
        # cancel to an exact zero once |z| is large
        M = _unit_lower_solve(lhs, rhs)
        ok = np.isfinite(M).all(axis=(1, 2))
        if ok.any():
            rho[ok] = np.max(np.abs(np.linalg.eigvals(M[ok])), axis=1)
        return rho.reshape(z.shape)
    sv = np.linalg.svd(lhs, compute_uv=False)
    ok = np.isfinite(sv).all(axis=1) & (sv[:, -1] > POLE_RCOND * sv[:, 0])
    if ok.any():
        M = np.linalg.solve(lhs[ok], rhs[ok])
        rho[ok] = np.max(np.abs(np.linalg.eigvals(M)), axis=1)
    return rho.reshape(z.shape)


@dataclass
class StabilityGrid:
    re_range: tuple
    im_range: tuple
    nx: int
    ny: int
    rho: np.ndarray  # (nx, ny); rho[i, j] at re[i] + 1j * im[j]
    stable: np.ndarray = field(init=False)

    def __post_init__(self):
        self.stable = self.rho <= 1.0 + STABLE_TOL

    @property
    def re(self) -> np.ndarray:
        return np.linspace(*self.re_range, self.nx)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(*self.im_range, self.ny)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "rho", "stable"])
        re, im = self.re, self.im
        for i in range(self.nx):
            for j in range(self.ny):
                w.writerow([fmt(re[i]), fmt(im[j]), fmt(self.rho[i, j]), int(self.stable[i, j])])
        return buf.getvalue()


def fmt(x: float) -> str:
    """17 significant digits, lossless for doubles."""
    return format(float(x), ".17g")


def scan_region(tableau: MethodTableau, re_range=None, im_range=None,
                nx: int = 401, ny: int = 401) -> StabilityGrid:
    """Sample ``rho(M(z))`` on a rectangle, by default ``[-s, s]^2``."""
    if nx < 2 or ny < 2:
        raise ValueError("need at least 2 samples per axis")
    s = tableau.s
    re_range = tuple(re_range) if re_range is not None else (-float(s), float(s))
    im_range = tuple(im_range) if im_range is not None else (-float(s), float(s))
    re = np.linspace(*re_range, nx)
    im = np.linspace(*im_range, ny)
    Z = re[:, None] + 1j * im[None, :]
    return StabilityGrid(re_range, im_range, nx, ny, spectral_radii(tableau, Z))


def real_axis_boundary(tableau: MethodTableau, lo=None, samples: int = 2000,
                       tol: float = 1e-12) -> float:
    """Left end ``x*`` of the stable real interval ``[x*, 0]``.

    Walks from 0 toward ``lo`` (default ``-2s``) on a dense grid until the
    first unstable sample, then bisects on ``rho(M(x)) = 1``. Returns ``lo``
    when the whole segment is stable.
    """
    lo = -2.0 * tableau.s if lo is None else float(lo)
    xs = np.linspace(0.0, lo, samples + 1)
    unstable = spectral_radii(tableau, xs) > 1.0 + STABLE_TOL
    if not unstable.any():
        return lo
    k = int(np.argmax(unstable))
    a, b = xs[k - 1], xs[k]  # a stable, b unstable
    while abs(b - a) > tol:
        mid = 0.5 * (a + b)
        if spectral_radius(tableau, mid) > 1.0 + STABLE_TOL:
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)


def amplification_poles(tableau: MethodTableau) -> np.ndarray:
    """Finite ``z`` where ``I - z R - z^2 Rhat`` is singular.

    Solved as the quadratic eigenproblem ``(z^2 Rhat + z R - I) x = 0``
    through its companion pencil. Explicit methods have none.
    """
    s = tableau.s
    eye = np.eye(s)
    zero = np.zeros((s, s))
    lhs = np.block([[zero, eye], [eye, -tableau.R]])
    rhs = np.block([[eye, zero], [zero, tableau.Rhat]])
    w = scipy.linalg.eigvals(lhs, rhs)
    return np.sort_complex(w[np.isfinite(w)])


@dataclass
class AStabilityReport:
    """Sampled evidence for A-stability; not a proof.

    ``violations`` lists sampled points with ``rho > 1 + tol``. ``poles``
    lists the exact poles of ``M(z)`` with ``Re z <= 0``; ``rho`` is unbounded
    near each of them, however narrow the unstable neighbourhood is.
    """

    method: str
    n_samples: int
    max_rho: float
    violations: list  # (z, rho) with rho > 1 + tol
    tol: float = A_STABLE_TOL
    poles: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """No sampled violations."""
        return not self.violations

    @property
    def pole_free(self) -> bool:
        return not self.poles


def a_stability_samples(radius: float = 1e6, n_radial: int = 200, n_angle: int = 200,
                        n_axis: int = 400, rmin: float = 1e-6) -> np.ndarray:
    """Log-radial samples of the closed left half plane plus the imaginary axis."""
    r = np.logspace(np.log10(rmin), np.log10(radius), n_radial)
    theta = np.linspace(np.pi / 2, 3 * np.pi / 2, n_angle)
    polar = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    half = np.logspace(np.log10(rmin), np.log10(radius), n_axis // 2)
    axis = 1j * np.concatenate([-half[::-1], half])
    return np.concatenate([polar, axis])


def check_a_stability(tableau: MethodTableau, samples=None, tol: float = A_STABLE_TOL,
                      **grid) -> AStabilityReport:
    z = a_stability_samples(**grid) if samples is None else np.asarray(samples, dtype=complex)
    rho = spectral_radii(tableau, z)
    bad = ~(rho <= 1.0 + tol)
    violations = [(complex(zz), float(rr)) for zz, rr in zip(z[bad], rho[bad])]
    finite = rho[np.isfinite(rho)]
    max_rho = float(finite.max()) if finite.size and not np.isinf(rho).any() else float("inf")
    poles = [complex(p) for p in amplification_poles(tableau) if p.real <= 0.0]
    return AStabilityReport(tableau.name, int(z.size), max_rho, violations, tol, poles)
