"""
Stationary points of the reformulated problem

    max  sum_i u_i**m   s.t.  u.u = 1,  sum_i u_i = 0,

with ``u = sqrt((n-1)/n) W^T v``. At a KKT point every coordinate is a real
root of ``t**(m-1) - alpha*t - beta``, so coordinates take two values (any m)
or three values (even m only). Two-value points are closed form; three-value
points are solved per multiplicity pattern with Newton's method.

Points are identified up to ``u ~ -u``. The stored representative is the one
whose sign-varying multiplier is positive (``alpha`` for odd m, ``beta`` for
even m); ties fall back to making the first non-negligible coordinate
positive.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .frame import Frame
from .numerics import NewtonError, newton_solve, poly_roots_real
from .tensor import SymTensor, contract_m, eigen_residual

KKT_TOL = 1e-10
NEWTON_DEDUPE = 1e-8
ORACLE_DEDUPE = 1e-6


class DegenerateCombinationError(ValueError):
    """(n, m) = (3, 4): the objective is constant on the sphere."""


class CorrespondenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TwoValue:
    """``k`` coordinates equal to ``a > 0``, the other ``n-k`` equal to ``b < 0``."""

    k: int
    a: float
    b: float

    kind = "two_value"

    def negated(self, n: int) -> "TwoValue":
        return TwoValue(n - self.k, -self.b, -self.a)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ThreeValue:
    """Values ``c > d > e`` with multiplicities ``p, q, s``."""

    p: int
    q: int
    s: int
    c: float
    d: float
    e: float

    kind = "three_value"

    def negated(self, n: int) -> "ThreeValue":
        return ThreeValue(self.s, self.q, self.p, -self.e, -self.d, -self.c)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "p": self.p, "q": self.q, "s": self.s,
                "c": self.c, "d": self.d, "e": self.e}


Structure = Union[TwoValue, ThreeValue]


@dataclass(frozen=True, eq=False)
class StationaryPoint:
    n: int
    m: int
    u: np.ndarray
    alpha: float
    beta: float
    structure: Optional[Structure]
    kkt_residual: float
    objective: float

    def negated(self) -> "StationaryPoint":
        """The KKT point ``-u`` (not canonicalized)."""
        u = -self.u
        alpha, beta = multipliers(u, self.m)
        st = self.structure.negated(self.n) if self.structure is not None else None
        return StationaryPoint(self.n, self.m, u, alpha, beta, st,
                               kkt_residual(u, self.m, alpha, beta), alpha)


@dataclass(frozen=True)
class EigenpairV:
    v: np.ndarray
    lam: float
    residual: float
    source: StationaryPoint = field(repr=False)


@dataclass
class Census:
    n: int
    m: int
    points: list
    expected_count: int
    upper_bound: int
    empty_partitions: list = field(default_factory=list)
    continuum_partitions: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def isolated(self) -> bool:
        """False when some pattern carries a curve of stationary points."""
        return not self.continuum_partitions

    @property
    def count_matches(self) -> bool:
        return self.isolated and self.count == self.expected_count

    @property
    def within_bound(self) -> bool:
        return self.count <= self.upper_bound

    @property
    def bound_attained(self) -> bool:
        return self.count == self.upper_bound


###############################################################################
# KKT bookkeeping


def multipliers(u: np.ndarray, m: int) -> tuple[float, float]:
    """``alpha = sum u**m`` and ``beta = mean(u**(m-1))``."""
    u = np.asarray(u, dtype=float)
    return float(np.sum(u ** m)), float(np.mean(u ** (m - 1)))


def kkt_residual(u: np.ndarray, m: int, alpha: float, beta: float) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u ** (m - 1) - alpha * u - beta)))


def is_feasible(u: np.ndarray, tol: float = 1e-12) -> bool:
    u = np.asarray(u, dtype=float)
    return abs(u @ u - 1.0) < tol and abs(np.sum(u)) < tol


def _sign_key(u: np.ndarray, m: int) -> float:
    # alpha flips with u for odd m, beta for even m
    return float(np.sum(u ** m)) if m % 2 else float(np.sum(u ** (m - 1)))


def canonical_sign(u: np.ndarray, m: int, tie: float = 1e-8) -> int:
    """
    Return +1 or -1 such that ``sign * u`` is the stored representative.

    ``tie`` is loose enough for points only certified to about 1e-10.
    """
    key = _sign_key(u, m)
    if key > tie:
        return 1
    if key < -tie:
        return -1
    for x in u:
        if abs(x) > 1e-6:
            return 1 if x > 0 else -1
    return 1


def make_point(u, m: int, structure: Optional[Structure] = None,
               canonicalize: bool = True) -> StationaryPoint:
    u = np.asarray(u, dtype=float)
    n = u.size
    if canonicalize and canonical_sign(u, m) < 0:
        u = -u
        if structure is not None:
            structure = structure.negated(n)
    alpha, beta = multipliers(u, m)
    return StationaryPoint(n, m, u, alpha, beta, structure,
                           kkt_residual(u, m, alpha, beta), alpha)


def _sort_key(p: StationaryPoint):
    return (-round(p.objective, 12), tuple(np.round(p.u, 12)))


def dedupe(points, radius: float) -> list:
    """Drop points within ``radius`` (max-norm) of an earlier kept point."""
    kept: list = []
    arr = np.empty((0, 0))
    for p in points:
        if kept and np.min(np.max(np.abs(arr - p.u), axis=1)) < radius:
            continue
        kept.append(p)
        arr = np.array([q.u for q in kept])
    return kept


###############################################################################
# Enumeration


def expected_count(n: int, m: int) -> int:
    """Closed-form number of stationary points (up to sign) claimed for (n, m)."""
    if m % 2:
        return 2 ** (n - 1) - 1
    if n == 3:
        if m == 4:
            raise DegenerateCombinationError("(n, m) = (3, 4) has a constant objective")
        return 6
    return (3 ** (n - 1) - 1) // 2


def upper_bound(m: int, d: int) -> int:
    """Eigenpair bound ``((m-1)**d - 1) / (m-2)`` for order m, dimension d."""
    return ((m - 1) ** d - 1) // (m - 2)


def two_value_ab(n: int, k: int) -> tuple[float, float]:
    return math.sqrt((n - k) / (k * n)), -math.sqrt(k / ((n - k) * n))


def enumerate_two_value(n: int, m: int) -> list:
    if n < 3 or m < 3:
        raise ValueError("need n >= 3 and m >= 3")
    out = []
    for k in range(1, n):
        a, b = two_value_ab(n, k)
        for subset in itertools.combinations(range(n), k):
            u = np.full(n, b)
            u[list(subset)] = a
            out.append(make_point(u, m, TwoValue(k, a, b)))
    out = dedupe(sorted(out, key=_sort_key), NEWTON_DEDUPE)
    return sorted(out, key=_sort_key)


def _complete_homogeneous(x: tuple[float, float, float], deg: int) -> float:
    c, d, e = x
    total = 0.0
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            total += c ** i * d ** j * e ** (deg - i - j)
    return total


def three_value_system(n: int, m: int, p: int, q: int, s: int):
    """
    Residual map for three-value points with multiplicities (p, q, s).

    The unknowns (c, d, e) must satisfy both constraints and be roots of one
    common trinomial ``t**(m-1) - alpha*t - beta``. The last condition is the
    vanishing of the second divided difference of ``t**(m-1)`` at (c, d, e),
    i.e. of the complete homogeneous polynomial of degree ``m-3``.
    """
    if p + q + s != n:
        raise ValueError("p + q + s must equal n")

    def F(x):
        c, d, e = x
        return np.array([
            p * c + q * d + s * e,
            p * c * c + q * d * d + s * e * e - 1.0,
            _complete_homogeneous((c, d, e), m - 3),
        ])

    return F


def _ellipse_starts(p: int, q: int, s: int, count: int) -> list:
    """Evenly spaced points on the constraint ellipse in (c, d, e)."""
    w = np.array([p, q, s], dtype=float)
    # weighted-orthonormal basis of the plane orthogonal to (1, 1, 1)
    b1 = np.array([q + s, -p, -p], dtype=float) if p else np.array([0.0, 1.0, -1.0])
    b1 /= math.sqrt(np.sum(w * b1 * b1))
    b2 = np.array([0.0, s, -q], dtype=float)
    b2 -= np.sum(w * b1 * b2) * b1
    b2 /= math.sqrt(np.sum(w * b2 * b2))
    th = 2 * math.pi * (np.arange(count) + 0.5) / count
    return [math.cos(t) * b1 + math.sin(t) * b2 for t in th]


class ContinuumPattern(Exception):
    """The root condition vanishes on the whole constraint ellipse."""


ROOT_CLUSTER = 1e-5


def solve_three_value(n: int, m: int, p: int, q: int, s: int,
                      starts: int = 64) -> list:
    """
    Distinct solutions (c, d, e) with ``c > d > e`` for one pattern.

    Newton roots closer than ``ROOT_CLUSTER`` are merged (keeping the one
    with the smallest residual): at singular roots Newton only pins the
    location to about the square root of its tolerance. Raises
    :class:`ContinuumPattern` when the pattern carries a whole curve of
    solutions.
    """
    F = three_value_system(n, m, p, q, s)
    x0s = _ellipse_starts(p, q, s, starts)
    if max(abs(F(x)[2]) for x in x0s) < 1e-12:
        raise ContinuumPattern((p, q, s))
    sols: list = []
    for x0 in x0s:
        try:
            x = newton_solve(F, x0)
        except NewtonError:
            continue
        if p == s and np.max(np.abs(x + x[::-1])) < ROOT_CLUSTER:
            # fixed point of (c, d, e) -> (-e, -d, -c): snap to it exactly
            sym = np.array([1.0, 0.0, -1.0]) / math.sqrt(2 * p)
            if np.max(np.abs(F(sym))) < 1e-12:
                x = sym
        c, d, e = x
        if not (c - d > 1e-6 and d - e > 1e-6):
            continue
        r = float(np.max(np.abs(F(x))))
        for i, (y, ry) in enumerate(sols):
            if np.max(np.abs(x - y)) < ROOT_CLUSTER:
                if r < ry:
                    sols[i] = (x, r)
                break
        else:
            sols.append((x, r))
    out = [x for x, _ in sols]
    out.sort(key=lambda x: tuple(-x))
    return out


def _assignments(n: int, p: int, q: int):
    idx = range(n)
    for P in itertools.combinations(idx, p):
        rest = [i for i in idx if i not in P]
        for Q in itertools.combinations(rest, q):
            yield P, Q, [i for i in rest if i not in Q]


def enumerate_three_value(n: int, m: int, starts: int = 64,
                          empty: Optional[list] = None,
                          continua: Optional[list] = None) -> list:
    """
    All three-value KKT points for even ``m``.

    :param starts: Newton starts per multiplicity pattern (>= 27)
    :param empty: if given, patterns without a real solution are appended
    :param continua: if given, patterns carrying a curve of KKT points are
        appended; they contribute no points
    """
    if m % 2 or m < 4:
        raise ValueError("three-value points exist only for even m >= 4")
    if (n, m) == (3, 4):
        raise DegenerateCombinationError("(n, m) = (3, 4) has a constant objective")
    out = []
    for p in range(1, n - 1):
        for q in range(1, n - p):
            s = n - p - q
            try:
                sols = solve_three_value(n, m, p, q, s, starts=max(starts, 27))
            except ContinuumPattern:
                if continua is not None:
                    continua.append((p, q, s))
                continue
            if not sols and empty is not None:
                empty.append((p, q, s))
            for c, d, e in sols:
                st = ThreeValue(p, q, s, float(c), float(d), float(e))
                for P, Q, R in _assignments(n, p, q):
                    u = np.empty(n)
                    u[list(P)], u[list(Q)], u[R] = c, d, e
                    pt = make_point(u, m, st)
                    if pt.kkt_residual < KKT_TOL and is_feasible(pt.u):
                        out.append(pt)
    out = dedupe(sorted(out, key=lambda p: p.kkt_residual), ROOT_CLUSTER)
    return sorted(out, key=_sort_key)


def census(n: int, m: int) -> Census:
    """Every stationary point (up to sign) for the (n, m) simplex tensor."""
    if n < 3 or m < 3:
        raise ValueError("need n >= 3 and m >= 3")
    if (n, m) == (3, 4):
        raise DegenerateCombinationError(
            "(n, m) = (3, 4) is degenerate: S v^4 is constant on the unit sphere")
    points = enumerate_two_value(n, m)
    empty: list = []
    continua: list = []
    if m % 2 == 0:
        points = points + enumerate_three_value(n, m, empty=empty, continua=continua)
    points = sorted(dedupe(points, NEWTON_DEDUPE), key=_sort_key)
    return Census(n, m, points, expected_count(n, m), upper_bound(m, n - 1),
                  empty, continua)


def check_roots(sp: StationaryPoint) -> bool:
    """Each coordinate is a real root of the point's trinomial."""
    roots = np.array(poly_roots_real(sp.m, sp.alpha, sp.beta))
    return bool(roots.size) and all(np.min(np.abs(roots - x)) < 1e-9 for x in sp.u)


###############################################################################
# u <-> v


def v_to_u(frame: Frame, v) -> np.ndarray:
    n = frame.n
    v = np.asarray(v, dtype=float)
    return math.sqrt((n - 1) / n) * (frame.W.T @ v)


def u_to_v(frame: Frame, u, tol: float = 1e-10) -> np.ndarray:
    n = frame.n
    u = np.asarray(u, dtype=float)
    if u.shape != (n,) or not is_feasible(u, tol):
        raise ValueError("u must satisfy u.u = 1 and sum(u) = 0")
    return math.sqrt((n - 1) / n) * (frame.W @ u)


def to_eigenpair(frame: Frame, S: SymTensor, sp: StationaryPoint,
                 tol: float = 1e-9) -> EigenpairV:
    v = u_to_v(frame, sp.u)
    lam = contract_m(S, v)
    res = eigen_residual(S, lam, v)
    if not res < tol:
        raise CorrespondenceError(f"eigen residual {res:.3e} for u={sp.u}")
    return EigenpairV(v, lam, res, sp)


###############################################################################
# Brute-force oracle


def random_feasible(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    U = rng.standard_normal((count, n))
    U -= U.mean(axis=1, keepdims=True)
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def gradient_flow(U: np.ndarray, m: int, signs: np.ndarray, eta: float = 0.1,
                  tol: float = 1e-10, max_iter: int = 10 ** 5):
    """
    Batched projected-gradient ascent (sign +1) / descent (sign -1).

    Returns the final iterates and a boolean mask of converged rows.
    """
    U = np.array(U, dtype=float, copy=True)
    done = np.zeros(len(U), dtype=bool)
    active = np.arange(len(U))
    for _ in range(max_iter + 1):
        X = U[active]
        G = X ** (m - 1)
        R = G - np.sum(G * X, axis=1, keepdims=True) * X - G.mean(axis=1, keepdims=True)
        ok = np.max(np.abs(R), axis=1) < tol
        done[active[ok]] = True
        keep = ~ok
        active, X, R = active[keep], X[keep], R[keep]
        if not active.size:
            break
        X = X + eta * signs[active, None] * R
        X -= X.mean(axis=1, keepdims=True)
        U[active] = X / np.linalg.norm(X, axis=1, keepdims=True)
    return U, done


def oracle_multistart(n: int, m: int, starts: int, seed: int = 0,
                      initial: Optional[np.ndarray] = None,
                      max_iter: int = 10 ** 5) -> tuple[list, int]:
    """
    Stationary points reached by projected gradient ascent and descent.

    Starts alternate between ascent and descent. Returns the deduplicated,
    certified, canonicalized points and the number of discarded starts.
    """
    if starts < 1 and initial is None:
        raise ValueError("starts must be >= 1")
    if initial is None:
        U0 = random_feasible(np.random.default_rng(seed), starts, n)
    else:
        U0 = np.atleast_2d(np.asarray(initial, dtype=float))
    signs = np.where(np.arange(len(U0)) % 2 == 0, 1.0, -1.0)
    U, done = gradient_flow(U0, m, signs, max_iter=max_iter)
    pts = []
    for u in U[done]:
        pt = make_point(u, m)
        if pt.kkt_residual < KKT_TOL:
            pts.append(pt)
    discarded = len(U0) - len(pts)
    pts = dedupe(sorted(pts, key=_sort_key), ORACLE_DEDUPE)
    return sorted(pts, key=_sort_key), discarded
