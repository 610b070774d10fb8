"""Coefficient tableaux for two-derivative general linear methods.

A method advances the stage vector ``V`` (``s`` values at times
``t_n + c_j dt``) by::

    V+ = D V + dt A F(V) + dt^2 Ahat Fdot(V) + dt R F(V+) + dt^2 Rhat Fdot(V+)

This module holds the coefficient container, abscissa recovery, the
truncation-error vectors and the order / error-inhibiting verifiers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import factorial
from typing import Optional

import numpy as np

from .errors import (
    EisViolation,
    InconsistentAbscissas,
    InvariantViolation,
    NonUniqueAbscissas,
    OrderShortfall,
)

#: Tolerance for order / EIS residuals (coefficients are printed to 15 decimals).
ORDER_TOL = 1e-9
#: Tolerance for row sums and row equality of ``D``.
STRUCTURE_TOL = 1e-12


class Kind(str, enum.Enum):
    EIS = "EIS"
    EIS_PLUS = "EIS+"


class Family(str, enum.Enum):
    EXPLICIT = "explicit"
    EXPLICIT_SSP = "ssp"
    IMPLICIT = "implicit"

    @property
    def is_explicit(self) -> bool:
        return self is not Family.IMPLICIT


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MethodTableau:
    """Immutable coefficient set of one method.

    ``c`` is recovered from the first-order condition when not supplied.
    Construction does not validate; call :meth:`validate` (``load_tableau``
    and the registry do so).
    """

    name: str
    D: np.ndarray
    A: np.ndarray
    Ahat: np.ndarray
    R: np.ndarray
    Rhat: np.ndarray
    p: int
    P: int
    kind: Kind
    family: Family
    ssp_coefficient: Optional[float] = None
    stored_tau: Optional[np.ndarray] = None
    c: np.ndarray = field(default=None)

    def __post_init__(self):
        for key in ("D", "A", "Ahat", "R", "Rhat"):
            object.__setattr__(self, key, _frozen(getattr(self, key)))
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "family", Family(self.family))
        s = self.D.shape[0]
        for key in ("D", "A", "Ahat", "R", "Rhat"):
            if getattr(self, key).shape != (s, s):
                raise InvariantViolation("shape", f"{key} must be {s}x{s}")
        if self.stored_tau is not None:
            tau = _frozen(self.stored_tau)
            if tau.shape != (s,):
                raise InvariantViolation("shape", f"tau must have length {s}")
            object.__setattr__(self, "stored_tau", tau)
        if self.c is None:
            object.__setattr__(self, "c", _frozen(recover_abscissas(self.D, self.A, self.R)))
        else:
            object.__setattr__(self, "c", _frozen(self.c))

    @property
    def s(self) -> int:
        return self.D.shape[0]

    @property
    def d_row(self) -> np.ndarray:
        """The common row of the rank-one matrix ``D``."""
        return self.D[0]

    def coefficients_equal(self, other: "MethodTableau") -> bool:
        """Bitwise equality on every coefficient and metadata field."""
        same_arrays = all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("D", "A", "Ahat", "R", "Rhat", "c")
        )
        if (self.stored_tau is None) != (other.stored_tau is None):
            return False
        if self.stored_tau is not None and not np.array_equal(self.stored_tau, other.stored_tau):
            return False
        return same_arrays and (
            self.name, self.p, self.P, self.kind, self.family, self.ssp_coefficient
        ) == (other.name, other.p, other.P, other.kind, other.family, other.ssp_coefficient)

    def validate(self) -> "MethodTableau":
        """Check the structural invariants; raise InvariantViolation on failure."""
        s = self.s
        one = np.ones(s)
        if np.max(np.abs(self.D @ one - one)) > STRUCTURE_TOL:
            raise InvariantViolation("consistency", "row sums of D differ from 1")
        if rank_one_defect(self.D) > STRUCTURE_TOL:
            raise InvariantViolation("rank_one", "rows of D are not identical")
        if self.c[0] != 0.0:
            raise InvariantViolation("abscissas", "c_1 must be 0")
        if np.any(np.diff(self.c) < -1e-12):
            raise InvariantViolation("abscissas", f"c is decreasing: {self.c}")
        if self.family.is_explicit:
            if np.any(np.triu(self.R) != 0) or np.any(np.triu(self.Rhat) != 0):
                raise InvariantViolation("explicit", "R and Rhat must be strictly lower triangular")
        else:
            off = ~np.eye(s, dtype=bool)
            if np.any(self.R[off] != 0) or np.any(self.Rhat[off] != 0):
                raise InvariantViolation("implicit", "R and Rhat must be diagonal")
        if self.stored_tau is not None:
            gap = np.max(np.abs(unnormalized_tau(self, self.p + 1) - self.stored_tau))
            if gap > ORDER_TOL:
                raise InvariantViolation("stored_tau", f"differs from computed tau by {gap:.3e}")
        return self

    def __repr__(self) -> str:
        return f"MethodTableau({self.name!r}, s={self.s}, p={self.p}, P={self.P})"


def rank_one_defect(D: np.ndarray) -> float:
    """Largest pairwise row difference of ``D`` (zero iff all rows agree)."""
    D = np.asarray(D, dtype=float)
    return float(np.max(np.abs(D[:, None, :] - D[None, :, :]))) if D.size else 0.0


def recover_abscissas(D, A, R) -> np.ndarray:
    """Solve ``(I - D) c = (A + R) 1 - 1`` with ``c_1 = 0``.

    The system is singular along ``1``; pinning the first abscissa removes
    that direction and the remaining ``s - 1`` unknowns are fitted in the
    least-squares sense.
    """
    D = np.asarray(D, dtype=float)
    s = D.shape[0]
    if s < 2:
        raise NonUniqueAbscissas("need at least two stages")
    one = np.ones(s)
    lhs = (np.eye(s) - D)[:, 1:]
    rhs = (np.asarray(A) + np.asarray(R)) @ one - one
    sol, _, rank, _ = np.linalg.lstsq(lhs, rhs, rcond=None)
    if rank < s - 1:
        raise NonUniqueAbscissas(f"reduced system has rank {rank} < {s - 1}")
    residual = float(np.max(np.abs(lhs @ sol - rhs)))
    if residual > ORDER_TOL:
        raise InconsistentAbscissas(f"first-order condition residual {residual:.3e}")
    return np.concatenate(([0.0], sol))


def _cpow(x: np.ndarray, k: int) -> np.ndarray:
    # 0**0 == 1 componentwise; negative powers only appear with a zero prefactor
    if k <= 0:
        return np.ones_like(x)
    return x**k


def compute_tau(tableau: MethodTableau, j: int) -> np.ndarray:
    """Truncation error vector of order ``j`` (coefficient of dt^j u^(j))."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    D, A, Ahat, R, Rhat, c = (
        tableau.D, tableau.A, tableau.Ahat, tableau.R, tableau.Rhat, tableau.c,
    )
    one = np.ones(tableau.s)
    if j == 0:
        return D @ one - one
    cm = c - one
    acc = (
        D @ _cpow(cm, j) / j
        + A @ _cpow(cm, j - 1)
        + R @ _cpow(c, j - 1)
        - _cpow(c, j) / j
    )
    if j >= 2:
        acc = acc + (j - 1) * (Ahat @ _cpow(cm, j - 2) + Rhat @ _cpow(c, j - 2))
    return acc / factorial(j - 1)


def unnormalized_tau(tableau: MethodTableau, j: int) -> np.ndarray:
    """``(j-1)! * tau_j``: the bracketed sum without the factorial prefactor.

    Published error vectors are tabulated in this normalization. Only the
    direction matters to the error-inhibiting conditions and to the filter.
    """
    if j == 0:
        return compute_tau(tableau, 0)
    return compute_tau(tableau, j) * factorial(j - 1)


@dataclass
class OrderReport:
    p_observed: int
    residuals: dict  # j -> max-norm of tau_j


def verify_order(tableau: MethodTableau, tol: float = ORDER_TOL, jmax: int = 16) -> OrderReport:
    """Largest ``p`` with ``|tau_j| <= tol`` for all ``j <= p``.

    Raises OrderShortfall when it falls below the declared order.
    """
    p_obs = -1
    for j in range(jmax + 1):
        if np.max(np.abs(compute_tau(tableau, j))) > tol:
            break
        p_obs = j
    residuals = {
        j: float(np.max(np.abs(compute_tau(tableau, j)))) for j in range(0, p_obs + 3)
    }
    report = OrderReport(p_obs, residuals)
    if p_obs < tableau.p:
        raise OrderShortfall(
            f"{tableau.name}: order conditions hold only to p={p_obs}, declared p={tableau.p}"
        )
    return report


@dataclass
class EisReport:
    con1: float
    con2: float
    con3: float
    required: tuple

    def as_dict(self) -> dict:
        return {"con1": self.con1, "con2": self.con2, "con3": self.con3}


def eis_residuals(tableau: MethodTableau) -> EisReport:
    p = tableau.p
    tau1 = compute_tau(tableau, p + 1)
    tau2 = compute_tau(tableau, p + 2)
    D = tableau.D
    required = ("con1",) if tableau.kind is Kind.EIS else ("con1", "con2", "con3")
    return EisReport(
        con1=float(np.max(np.abs(D @ tau1))),
        con2=float(np.max(np.abs(D @ tau2))),
        con3=float(np.max(np.abs(D @ (tableau.A + tableau.R) @ tau1))),
        required=required,
    )


def verify_eis(tableau: MethodTableau, tol: float = ORDER_TOL) -> EisReport:
    """Evaluate the error-inhibiting conditions; raise EisViolation if a required one fails."""
    report = eis_residuals(tableau)
    values = report.as_dict()
    failed = [k for k in report.required if values[k] > tol]
    if failed:
        raise EisViolation(failed, values)
    return report


def zero_stability_eigenvalues(tableau: MethodTableau) -> np.ndarray:
    """Eigenvalues of ``D`` sorted by decreasing modulus."""
    ev = np.linalg.eigvals(tableau.D)
    return ev[np.argsort(-np.abs(ev), kind="stable")]
