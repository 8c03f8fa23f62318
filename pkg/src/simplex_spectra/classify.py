"""
Local optimality of stationary points, decided two independent ways.

The closed-form route reads the verdict off the point's structure (sign of
the two diagonal Hessian values for two-value points, the integer test
``l(m, n, k)`` for even order, the middle multiplicity for three-value
points). The numeric route diagonalizes the projected Hessian
``M = P H P`` with ``P = I - u u^T - J/n``. :func:`classify` runs both and
insists they agree wherever the closed form is decisive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import Spectrum, householder_qr, sym_eig
from .stationary import StationaryPoint, ThreeValue, TwoValue

ALIGN_TOL = 1e-6


class Verdict(str, enum.Enum):
    LOCAL_MAX = "LocalMax"
    LOCAL_MIN = "LocalMin"
    SADDLE = "Saddle"
    UNRESOLVED = "UnresolvedByTheory"


class TheoryNumericMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    theory_verdict: Verdict
    theory_path: str
    numeric_verdict: Optional[Verdict] = None
    spectrum: Optional[Spectrum] = None
    tangent_eigenvalues: Optional[np.ndarray] = None
    sigma_a: Optional[float] = None
    sigma_b: Optional[float] = None
    l_value: Optional[int] = None
    degenerate: bool = False
    note: str = ""

    @property
    def decisive(self) -> bool:
        return self.theory_verdict is not Verdict.UNRESOLVED


###############################################################################
# Matrices


def hessian_u(sp: StationaryPoint, m: Optional[int] = None) -> np.ndarray:
    """Lagrangian Hessian ``(m-1) diag(u**(m-2)) - alpha I``."""
    m = sp.m if m is None else m
    return np.diag((m - 1) * sp.u ** (m - 2) - sp.alpha)


def projector(sp: StationaryPoint) -> np.ndarray:
    """Orthogonal projector onto the complement of span{u, 1}."""
    n = sp.n
    return np.eye(n) - np.outer(sp.u, sp.u) - np.full((n, n), 1.0 / n)


def projected_hessian(sp: StationaryPoint, m: Optional[int] = None) -> np.ndarray:
    P = projector(sp)
    M = P @ hessian_u(sp, m) @ P
    return 0.5 * (M + M.T)


def tangent_basis(sp: StationaryPoint) -> np.ndarray:
    """Trailing ``n-2`` columns of the full QR of ``[u, 1]``."""
    A = np.column_stack([sp.u, np.ones(sp.n)])
    Q, R = householder_qr(A, full=True)
    if abs(R[1, 1]) < 1e-10 * max(1.0, abs(R[0, 0])):
        raise ValueError("constraint gradients [u, 1] are rank deficient")
    return Q[:, 2:]


def projected_hessian_qr(sp: StationaryPoint, m: Optional[int] = None) -> np.ndarray:
    Q2 = tangent_basis(sp)
    M = Q2.T @ hessian_u(sp, m) @ Q2
    return 0.5 * (M + M.T)


###############################################################################
# Closed-form route


def l_value(m: int, n: int, k: int) -> int:
    """Exact integer ``(m-1) n k**(m-2) - (n-k)**(m-1) - k**(m-1)``."""
    return (m - 1) * n * k ** (m - 2) - (n - k) ** (m - 1) - k ** (m - 1)


_swap = {Verdict.LOCAL_MAX: Verdict.LOCAL_MIN, Verdict.LOCAL_MIN: Verdict.LOCAL_MAX}


def classify_theory(sp: StationaryPoint, n: Optional[int] = None,
                    m: Optional[int] = None) -> Classification:
    n = sp.n if n is None else n
    m = sp.m if m is None else m
    st = sp.structure
    if st is None:
        raise ValueError("closed-form classification needs a structure descriptor")

    if isinstance(st, ThreeValue):
        if m % 2:
            raise ValueError("three-value points only occur for even m")
        if st.q != 1:
            return Classification(Verdict.SADDLE, Verdict.SADDLE, "even-three-value-q>1")
        return Classification(Verdict.UNRESOLVED, Verdict.UNRESOLVED, "even-three-value-q=1",
                              note="not locally maximal; q = 1 is open in closed form")

    if not isinstance(st, TwoValue):
        raise ValueError(f"unknown structure {st!r}")
    k, a, b = st.k, st.a, st.b
    sigma_a = (m - 1) * a ** (m - 2) - sp.alpha
    sigma_b = (m - 1) * b ** (m - 2) - sp.alpha

    if m % 2:
        # f(-u) = -f(u): a point with k > n/2 is the negative of a k' = n-k point
        kk = min(k, n - k)
        verdict = Verdict.LOCAL_MAX if kk == 1 else Verdict.SADDLE
        path = "odd-two-value-k=1" if kk == 1 else "odd-two-value-k>=2"
        if k > n - k:
            verdict = _swap.get(verdict, verdict)
            path += "-negated"
        return Classification(verdict, verdict, path, sigma_a=sigma_a, sigma_b=sigma_b)

    # even m: H and M are invariant under u -> -u, so only min(k, n-k) matters
    kk = min(k, n - k)
    lv = l_value(m, n, kk)
    if kk == 1:
        verdict = Verdict.LOCAL_MAX if lv < 0 else Verdict.UNRESOLVED
        return Classification(verdict, verdict, "even-two-value-k=1",
                              sigma_a=sigma_a, sigma_b=sigma_b, l_value=lv)
    if lv > 0:
        verdict = Verdict.LOCAL_MIN
    elif lv < 0:
        verdict = Verdict.SADDLE
    else:
        verdict = Verdict.UNRESOLVED
    return Classification(verdict, verdict, "even-two-value-l-test",
                          sigma_a=sigma_a, sigma_b=sigma_b, l_value=lv,
                          note="l(m,n,k) = 0" if lv == 0 else "")


###############################################################################
# Numeric route


def structural_split(sp: StationaryPoint, spec: Spectrum) -> tuple[np.ndarray, bool]:
    """
    Remove the two eigenvalues belonging to span{u, 1}.

    They are identified by eigenvector alignment with that span. Returns the
    remaining (tangent) eigenvalues and whether the alignment was clean.
    """
    V = spec.eigenvectors
    B = np.column_stack([sp.u, np.ones(sp.n) / np.sqrt(sp.n)])
    align = np.linalg.norm(B.T @ V, axis=0)
    order = np.argsort(-align, kind="stable")
    structural = order[:2]
    clean = bool(np.all(align[structural] > 1 - ALIGN_TOL)
                 and np.all(np.abs(spec.eigenvalues[structural]) < spec.tau))
    keep = np.sort(order[2:])
    return spec.eigenvalues[keep], clean


def verdict_from_tangent(ev: np.ndarray, tau: float) -> tuple[Verdict, bool]:
    """Verdict from tangent eigenvalues and a flag for near-zero ones."""
    neg = ev <= -tau
    pos = ev >= tau
    degenerate = bool(np.any(~neg & ~pos))
    if neg.any() and pos.any():
        return Verdict.SADDLE, degenerate
    if pos.any():
        return Verdict.LOCAL_MIN, degenerate
    if neg.any():
        return Verdict.LOCAL_MAX, degenerate
    return Verdict.UNRESOLVED, True


def classify_numeric(sp: StationaryPoint, n: Optional[int] = None,
                     m: Optional[int] = None) -> Classification:
    spec = sym_eig(projected_hessian(sp, m))
    tangent, clean = structural_split(sp, spec)
    verdict, degenerate = verdict_from_tangent(tangent, spec.tau)
    note = "" if clean else "structural zeros not cleanly separated"
    return Classification(verdict, Verdict.UNRESOLVED, "numeric", verdict, spec, tangent,
                          degenerate=degenerate or not clean, note=note)


def classify(sp: StationaryPoint, n: Optional[int] = None,
             m: Optional[int] = None) -> Classification:
    """Both routes; raises :class:`TheoryNumericMismatch` on disagreement."""
    th = classify_theory(sp, n, m)
    nu = classify_numeric(sp, n, m)
    q_one = th.theory_path == "even-three-value-q=1"
    if th.decisive and th.verdict is not nu.verdict:
        raise TheoryNumericMismatch(
            f"{th.theory_path}: closed form says {th.verdict.value}, "
            f"spectrum says {nu.verdict.value} for u={sp.u}")
    if q_one and nu.verdict is Verdict.LOCAL_MAX:
        raise TheoryNumericMismatch(f"q = 1 three-value point classified LocalMax: u={sp.u}")
    verdict = th.verdict if th.decisive else nu.verdict
    notes = "; ".join(x for x in (th.note, nu.note) if x)
    if not th.decisive:
        notes = "; ".join(x for x in (notes, "verdict from spectrum") if x)
    return Classification(verdict, th.verdict, th.theory_path, nu.verdict, nu.spectrum,
                          nu.tangent_eigenvalues, th.sigma_a, th.sigma_b, th.l_value,
                          nu.degenerate, notes)


def tangent_spectrum_qr(sp: StationaryPoint, m: Optional[int] = None) -> np.ndarray:
    spec = sym_eig(projected_hessian_qr(sp, m), vectors=False)
    return spec.eigenvalues

