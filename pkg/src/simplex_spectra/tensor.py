"""
Dense real symmetric tensors and their contractions.

A tensor built from a frame keeps the frame so that contractions can use the
rank-one sums ``sum_i (v.w_i)**k w_i``; the dense path is always available
and serves as the cross-check for the fast one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .frame import Frame

MAX_ENTRIES = 10 ** 8
UNIT_TOL = 1e-10


class TensorSizeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymTensor:
    """
    Symmetric tensor of order ``m`` and dimension ``d``.

    ``entries`` has shape ``(d,) * m``. ``frame`` is set for regular simplex
    tensors and enables the rank-one contraction path.
    """

    m: int
    d: int
    entries: np.ndarray
    frame: Optional[Frame] = None

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"tensor order must be >= 3, got {self.m}")
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.d,) * self.m:
            raise ValueError(f"entries must have shape {(self.d,) * self.m}, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def zeros(cls, d: int, m: int) -> "SymTensor":
        _guard_size(d, m)
        return cls(m, d, np.zeros((d,) * m))

    def _use_frame(self, path: str) -> bool:
        if path == "dense":
            return False
        if path == "frame":
            if self.frame is None:
                raise ValueError("tensor has no generating frame")
            return True
        return self.frame is not None


def _guard_size(d: int, m: int) -> None:
    if d ** m > MAX_ENTRIES:
        raise TensorSizeError(f"d**m = {d}**{m} exceeds the {MAX_ENTRIES:.0e} entry limit")


def outer_power(w: np.ndarray, m: int) -> np.ndarray:
    out = np.asarray(w, dtype=float)
    for _ in range(m - 1):
        out = np.multiply.outer(out, w)
    return out


def from_frame(frame: Frame, m: int) -> SymTensor:
    """Regular simplex tensor ``sum_k w_k^{outer m}``."""
    if m < 3:
        raise ValueError(f"tensor order must be >= 3, got {m}")
    d = frame.dim
    _guard_size(d, m)
    S = np.zeros((d,) * m)
    for k in range(frame.n):
        S += outer_power(frame.W[:, k], m)
    return SymTensor(m, d, _symmetrize_exact(S), frame)


def _symmetrize_exact(T: np.ndarray, chunk: int = 1 << 20) -> np.ndarray:
    """
    Copy every entry from its sorted-index representative.

    Rounding in the outer products depends on factor order, so permuted
    entries can differ in the last bit; afterwards they are bit-identical.
    """
    shape = T.shape
    flat = T.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, chunk):
        idx = np.arange(start, min(start + chunk, flat.size))
        multi = np.sort(np.stack(np.unravel_index(idx, shape)), axis=0)
        out[idx] = flat[np.ravel_multi_index(tuple(multi), shape)]
    return out.reshape(shape)


def _check_vec(S: SymTensor, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (S.d,):
        raise ValueError(f"vector of dimension {S.d} expected, got shape {v.shape}")
    return v


def _dense_contract(S: SymTensor, v: np.ndarray, times: int) -> np.ndarray:
    T = S.entries
    for _ in range(times):
        T = T @ v
    return T


def contract_m(S: SymTensor, v, path: str = "auto") -> float:
    """``S v^m``."""
    v = _check_vec(S, v)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        warnings.warn("contract_m called with a non-unit vector", stacklevel=2)
    if S._use_frame(path):
        return float(np.sum((S.frame.W.T @ v) ** S.m))
    return float(_dense_contract(S, v, S.m))


def contract_m1(S: SymTensor, v, path: str = "auto") -> np.ndarray:
    """``S v^(m-1)``, a vector of length ``d``."""
    v = _check_vec(S, v)
    if S._use_frame(path):
        W = S.frame.W
        return W @ ((W.T @ v) ** (S.m - 1))
    return np.asarray(_dense_contract(S, v, S.m - 1), dtype=float)


def contract_m2(S: SymTensor, v, path: str = "auto") -> np.ndarray:
    """``S v^(m-2)``, a symmetric ``d x d`` matrix."""
    v = _check_vec(S, v)
    if S._use_frame(path):
        W = S.frame.W
        return (W * (W.T @ v) ** (S.m - 2)) @ W.T
    return np.asarray(_dense_contract(S, v, S.m - 2), dtype=float)


def eigen_residual(S: SymTensor, lam: float, v, path: str = "auto") -> float:
    """``||S v^(m-1) - lam v||_2``; an eigenpair certificate when below 1e-10."""
    v = _check_vec(S, v)
    return float(np.linalg.norm(contract_m1(S, v, path) - lam * v))
