"""
Shifted symmetric higher-order power iteration

    v <- normalize(S v^(m-1) + shift * v)

and basin-of-attraction experiments over random starts. Whether every
attracting eigenvector is a frame vector is reported, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .frame import Frame, build_frame
from .stationary import Census, ORACLE_DEDUPE, census, make_point, v_to_u
from .tensor import SymTensor, contract_m, contract_m1, from_frame

FRAME_MATCH = 1e-6


class NonConvergence(RuntimeError):
    pass


@dataclass
class PowerRun:
    start: np.ndarray
    shift: float
    trajectory_len: int
    limit: np.ndarray
    limit_lambda: float
    residual: float
    converged: bool
    monotone: bool
    matched_frame_index: Optional[int] = None
    matched_frame_sign: int = 0
    matched_distance: float = float("inf")


def default_shift(m: int, n: int) -> float:
    """Crude convexifying shift ``(m-1) * n``."""
    return float((m - 1) * n)


def _rows_lambda(S: SymTensor, V: np.ndarray) -> np.ndarray:
    if S.frame is not None:
        return np.sum((V @ S.frame.W) ** S.m, axis=1)
    return np.array([contract_m(S, v) for v in V])


def _rows_m1(S: SymTensor, V: np.ndarray) -> np.ndarray:
    if S.frame is not None:
        W = S.frame.W
        return ((V @ W) ** (S.m - 1)) @ W.T
    return np.array([contract_m1(S, v) for v in V])


def power_batch(S: SymTensor, V0: np.ndarray, shift: float, max_iter: int = 10 ** 5,
                tol: float = 1e-12):
    """
    Run the shifted iteration on every row of ``V0``.

    Returns ``(limits, iterations, converged, monotone)``.
    """
    V = np.array(np.atleast_2d(V0), dtype=float, copy=True)
    B = len(V)
    iters = np.zeros(B, dtype=int)
    converged = np.zeros(B, dtype=bool)
    monotone = np.ones(B, dtype=bool)
    obj = _rows_lambda(S, V)
    active = np.arange(B)
    for _ in range(max_iter):
        if not active.size:
            break
        X = V[active]
        Y = _rows_m1(S, X) + shift * X
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        new_obj = _rows_lambda(S, Y)
        monotone[active] &= new_obj >= obj[active] - 1e-12 * (1.0 + abs(shift))
        obj[active] = new_obj
        step = np.linalg.norm(Y - X, axis=1)
        V[active] = Y
        iters[active] += 1
        ok = step < tol
        converged[active[ok]] = True
        active = active[~ok]
    return V, iters, converged, monotone


def _match_frame(frame: Optional[Frame], v: np.ndarray, m: int):
    if frame is None:
        return None, 0, float("inf")
    best = (None, 0, float("inf"))
    for i in range(frame.n):
        for sg in (1, -1):
            dist = float(np.linalg.norm(v - sg * frame.W[:, i]))
            if dist < best[2]:
                best = (i, sg, dist)
    return best if best[2] < FRAME_MATCH else (None, 0, best[2])


def power_iterate(S: SymTensor, v0, shift: Optional[float] = None,
                  max_iter: int = 10 ** 5, tol: float = 1e-12,
                  raise_on_failure: bool = False) -> PowerRun:
    """Single shifted power run from unit ``v0``."""
    v0 = np.asarray(v0, dtype=float)
    if abs(np.linalg.norm(v0) - 1.0) > 1e-10:
        raise ValueError("start vector must have unit norm")
    if shift is None:
        shift = default_shift(S.m, S.d + 1)
    if shift < 0:
        raise ValueError("shift must be non-negative")
    V, iters, conv, mono = power_batch(S, v0[None, :], shift, max_iter, tol)
    return _make_run(S, v0, shift, V[0], int(iters[0]), bool(conv[0]), bool(mono[0]),
                     raise_on_failure)


def _make_run(S, v0, shift, v, iters, conv, mono, raise_on_failure=False) -> PowerRun:
    lam = contract_m(S, v)
    res = float(np.linalg.norm(contract_m1(S, v) - lam * v))
    if not conv and raise_on_failure:
        raise NonConvergence(f"no convergence after {iters} iterations")
    idx, sg, dist = _match_frame(S.frame, v, S.m)
    return PowerRun(v0, shift, iters, v, lam, res, conv, mono, idx, sg, dist)


@dataclass
class BasinReport:
    n: int
    m: int
    runs: int
    seed: int
    shift: float
    converged: int = 0
    non_converged: int = 0
    frame_hits: int = 0
    other_eigenpair_hits: int = 0
    unmatched: int = 0
    max_residual: float = 0.0
    max_census_distance: float = 0.0
    point_hits: dict = field(default_factory=dict)
    frame_index_hits: dict = field(default_factory=dict)

    def fraction(self, count: int) -> float:
        return count / self.runs if self.runs else 0.0

    @property
    def frame_hit_fraction(self) -> float:
        """Share of converged runs ending on a frame vector."""
        return self.frame_hits / self.converged if self.converged else 0.0

    @property
    def all_certified(self) -> bool:
        return self.unmatched == 0 and self.max_residual < 1e-8

    def as_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "runs": self.runs, "seed": self.seed,
            "shift": self.shift, "converged": self.converged,
            "non_converged": self.non_converged, "frame_hits": self.frame_hits,
            "other_eigenpair_hits": self.other_eigenpair_hits, "unmatched": self.unmatched,
            "frame_hit_fraction": self.frame_hit_fraction,
            "fraction_frame": self.fraction(self.frame_hits),
            "fraction_other": self.fraction(self.other_eigenpair_hits),
            "fraction_non_converged": self.fraction(self.non_converged),
            "max_residual": self.max_residual,
            "max_census_distance": self.max_census_distance,
            "all_certified": self.all_certified,
            "point_hits": {str(k): v for k, v in sorted(self.point_hits.items())},
            "frame_index_hits": {str(k): v for k, v in sorted(self.frame_index_hits.items())},
        }


def basin_experiment(n: int, m: int, runs: int, seed: int = 0,
                     shift: Optional[float] = None, max_iter: int = 10 ** 5,
                     reference: Optional[Census] = None) -> BasinReport:
    """
    Shifted power runs from uniform random unit starts.

    Each converged limit is mapped to u-space, canonicalized and matched to
    the census at 1e-6; ``point_hits`` is keyed by census index.
    """
    if runs < 0:
        raise ValueError("runs must be >= 0")
    shift = default_shift(m, n) if shift is None else float(shift)
    report = BasinReport(n, m, runs, seed, shift)
    if runs == 0:
        return report
    frame = build_frame(n)
    S = from_frame(frame, m)
    cen = census(n, m) if reference is None else reference
    ref = np.array([p.u for p in cen.points])

    rng = np.random.default_rng(seed)
    V0 = rng.standard_normal((runs, n - 1))
    V0 /= np.linalg.norm(V0, axis=1, keepdims=True)
    V, iters, conv, mono = power_batch(S, V0, shift, max_iter)
    for i in range(runs):
        if not conv[i]:
            report.non_converged += 1
            continue
        run = _make_run(S, V0[i], shift, V[i], int(iters[i]), True, bool(mono[i]))
        report.converged += 1
        report.max_residual = max(report.max_residual, run.residual)
        pt = make_point(v_to_u(frame, run.limit), m)
        d = np.max(np.abs(ref - pt.u), axis=1)
        j = int(np.argmin(d))
        report.max_census_distance = max(report.max_census_distance, float(d[j]))
        if d[j] >= ORACLE_DEDUPE:
            report.unmatched += 1
            continue
        report.point_hits[j] = report.point_hits.get(j, 0) + 1
        if run.matched_frame_index is not None:
            report.frame_hits += 1
            key = run.matched_frame_index
            report.frame_index_hits[key] = report.frame_index_hits.get(key, 0) + 1
        else:
            report.other_eigenpair_hits += 1
    return report
