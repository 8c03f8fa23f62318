"""
Small dense numerics used throughout the package.

Everything here targets matrices of a dozen rows or so: a cyclic Jacobi
eigensolver, Householder QR, a finite-difference Newton solver and real
root isolation for the trinomials ``t**(m-1) - alpha*t - beta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class NumericsError(RuntimeError):
    """Base class for failures of the small numerical kernels."""


class NotSymmetricError(NumericsError, ValueError):
    pass


class ConvergenceError(NumericsError):
    pass


class NewtonError(NumericsError):
    """A Newton start did not converge (not a program fault)."""


class MaxIterationsError(NewtonError):
    pass


class SingularJacobianError(NewtonError):
    pass


###############################################################################
# Symmetric eigenproblem


@dataclass(frozen=True)
class Spectrum:
    """
    Eigen-decomposition of a real symmetric matrix.

    :param eigenvalues: ascending eigenvalues
    :param eigenvectors: matching orthonormal columns, or ``None``
    :param tau: zero threshold used for the signature
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    tau: float

    @property
    def signature(self) -> tuple[int, int, int]:
        """Counts of (negative, zero, positive) eigenvalues under ``tau``."""
        ev = self.eigenvalues
        neg = int(np.sum(ev <= -self.tau))
        pos = int(np.sum(ev >= self.tau))
        return neg, len(ev) - neg - pos, pos


def zero_threshold(eigenvalues) -> float:
    """tau = 1e-8 * max(1, spectral radius)."""
    radius = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return 1e-8 * max(1.0, radius)


def sym_eig(A, vectors: bool = True, max_sweeps: int = 100) -> Spectrum:
    """
    Full spectrum of a small symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``1e-13 * ||A||_F``.

    :param A: real symmetric ``k x k`` array, ``k <= 64``
    :param vectors: also accumulate eigenvectors
    :param max_sweeps: sweep budget before :class:`ConvergenceError`
    """
    a = np.array(A, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    k = a.shape[0]
    if k > 64:
        raise ValueError(f"sym_eig is meant for k <= 64, got k={k}")
    if k and np.max(np.abs(a - a.T)) >= 1e-10:
        raise NotSymmetricError("input matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(k)
    target = 1e-13 * np.linalg.norm(a)

    offmask = ~np.eye(k, dtype=bool)

    def off(x):
        return np.sqrt(np.sum(x[offmask] ** 2))

    sweeps = 0
    while off(a) > target:
        if sweeps == max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                if vectors:
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq

    ev = np.diag(a).copy()
    order = np.argsort(ev, kind="stable")
    ev = ev[order]
    vecs = v[:, order] if vectors else None
    return Spectrum(ev, vecs, zero_threshold(ev))


###############################################################################
# QR


def householder_qr(A, full: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """
    Householder QR of an ``r x c`` matrix.

    With ``full=True`` returns ``Q`` of shape ``(r, r)`` and ``R`` of shape
    ``(r, c)``; otherwise the economic factors. Diagonal of ``R`` is made
    non-negative so the factorization is canonical for full-rank input.
    """
    a = np.array(A, dtype=float, copy=True)
    r, c = a.shape
    q = np.eye(r)
    for j in range(min(r - 1, c)):
        x = a[j:, j]
        normx = np.linalg.norm(x)
        if normx == 0.0:
            continue
        alpha = -normx if x[0] >= 0 else normx
        w = x.copy()
        w[0] -= alpha
        nw = np.linalg.norm(w)
        if nw == 0.0:
            continue
        w /= nw
        a[j:, :] -= 2.0 * np.outer(w, w @ a[j:, :])
        q[:, j:] -= 2.0 * np.outer(q[:, j:] @ w, w)
    for j in range(min(r, c)):
        if a[j, j] < 0:
            a[j, :] *= -1.0
            q[:, j] *= -1.0
    a[np.tril_indices(r, -1, c)] = 0.0
    if full:
        return q, a
    kk = min(r, c)
    return q[:, :kk], a[:kk, :]


def qr_solve(A, b, rcond: float = 1e-12) -> np.ndarray:
    """Solve a square system through QR; raise on (near) singularity."""
    q, rr = householder_qr(A, full=True)
    d = np.abs(np.diag(rr))
    scale = max(float(np.max(d)) if d.size else 0.0, 1e-300)
    if d.size == 0 or np.min(d) <= rcond * scale or np.max(d) == 0.0:
        raise SingularJacobianError("matrix is numerically singular")
    y = q.T @ np.asarray(b, dtype=float)
    n = rr.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - rr[i, i + 1:] @ x[i + 1:]) / rr[i, i]
    return x


###############################################################################
# Newton


def fd_jacobian(F: Callable, x: np.ndarray, step: float = 1e-7) -> np.ndarray:
    """Central finite-difference Jacobian."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(F(x), dtype=float)
    J = np.empty((f0.size, x.size))
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        J[:, j] = (np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2.0 * step)
    return J


def newton_solve(F: Callable, x0, tol: float = 1e-12, max_iter: int = 100,
                 step: float = 1e-7) -> np.ndarray:
    """
    Newton's method with a central-difference Jacobian.

    Returns ``x`` with ``max|F(x)| < tol``. Raises
    :class:`SingularJacobianError` or :class:`MaxIterationsError` when the
    start does not converge.
    """
    x = np.array(x0, dtype=float, copy=True)
    for _ in range(max_iter + 1):
        fx = np.asarray(F(x), dtype=float)
        if not np.all(np.isfinite(fx)):
            raise MaxIterationsError("residual became non-finite")
        if np.max(np.abs(fx)) < tol:
            return x
        J = fd_jacobian(F, x, step)
        x = x - qr_solve(J, fx)
    raise MaxIterationsError(f"no convergence within {max_iter} iterations")


###############################################################################
# Trinomial roots


def _trinomial(m: int, alpha: float, beta: float):
    return lambda t: t ** (m - 1) - alpha * t - beta


def _refine(g, dg, lo: float, hi: float) -> float:
    """Safeguarded Newton/bisection on a bracket with a sign change."""
    glo = g(lo)
    t = 0.5 * (lo + hi)
    for _ in range(200):
        gt = g(t)
        if gt == 0.0:
            return t
        if np.sign(gt) == np.sign(glo):
            lo, glo = t, gt
        else:
            hi = t
        d = dg(t)
        cand = t - gt / d if d != 0.0 else 0.5 * (lo + hi)
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        if abs(cand - t) <= 1e-16 * max(1.0, abs(t)):
            return cand
        t = cand
    return t


def poly_roots_real(m: int, alpha: float, beta: float) -> list[float]:
    """
    All real roots of ``t**(m-1) - alpha*t - beta``, ascending.

    The derivative ``(m-1) t**(m-2) - alpha`` has closed-form real zeros,
    which split the line into monotone pieces; each piece holds at most one
    root. Double roots sitting on a critical point are picked up directly.
    """
    if m < 3:
        raise ValueError("m must be >= 3")
    g = _trinomial(m, alpha, beta)

    def dg(t):
        return (m - 1) * t ** (m - 2) - alpha

    bound = 1.0 + max(abs(alpha), abs(beta))
    crit: list[float] = []
    extrema = True
    ratio = alpha / (m - 1)
    if (m - 2) % 2 == 0:
        if ratio > 0:
            r = ratio ** (1.0 / (m - 2))
            crit = [-r, r]
        elif ratio == 0:
            # flat inflection: g stays monotone, no double root possible
            crit = [0.0]
            extrema = False
    else:
        crit = [float(np.sign(ratio) * abs(ratio) ** (1.0 / (m - 2)))]
    knots = [-bound] + [c for c in crit if -bound < c < bound] + [bound]

    scale = max(1.0, abs(alpha), abs(beta))
    found: list[tuple[int, float]] = []  # (interval index, root)
    for j, (lo, hi) in enumerate(zip(knots[:-1], knots[1:])):
        glo, ghi = g(lo), g(hi)
        if glo == 0.0:
            found.append((j, lo))
        if np.sign(glo) * np.sign(ghi) < 0:
            found.append((j, _refine(g, dg, lo, hi)))
    if g(bound) == 0.0:
        found.append((len(knots) - 2, bound))
    roots = [r for _, r in found]
    # An extremum with |g| at rounding level is a double root if nothing
    # crosses next to it, or if the crossings are rounding splinters of it.
    for j, c in enumerate(knots[1:-1]):
        if not extrema or abs(g(c)) > 1e-14 * scale:
            continue
        near = [r for i, r in found if i in (j, j + 1)]
        close = [r for r in near if abs(r - c) <= 1e-6 * max(1.0, abs(c))]
        if close or not near:
            roots = [r for r in roots if r not in close] + [c]

    roots.sort()
    out: list[float] = []
    for r in roots:
        if not out or abs(r - out[-1]) > 1e-9:
            out.append(float(r))
    return out
