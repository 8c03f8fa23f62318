"""Regular simplex frames: n unit vectors in R^(n-1) with equal pairwise angles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import householder_qr

FRAME_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Frame:
    """
    Regular simplex frame.

    :param n: vertex count (``n >= 3``)
    :param W: ``(n-1) x n`` matrix whose columns are the frame vectors
    """

    n: int
    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        W.setflags(write=False)
        object.__setattr__(self, "W", W)
        if W.shape != (self.n - 1, self.n):
            raise ValueError(f"frame matrix must be {(self.n - 1, self.n)}, got {W.shape}")

    @property
    def dim(self) -> int:
        return self.n - 1

    def vector(self, i: int) -> np.ndarray:
        return self.W[:, i].copy()

    def check(self, tol: float = FRAME_TOL) -> dict[str, float]:
        """Deviation of each defining identity; raises if any exceeds ``tol``."""
        n, W = self.n, self.W
        G = W.T @ W
        off = G[~np.eye(n, dtype=bool)]
        dev = {
            "unit_norm": float(np.max(np.abs(np.diag(G) - 1.0))),
            "equiangular": float(np.max(np.abs(off + 1.0 / (n - 1)))),
            "tight": float(np.linalg.norm(W @ W.T - n / (n - 1) * np.eye(n - 1))),
            "centered": float(np.max(np.abs(W.sum(axis=1)))),
        }
        bad = {k: v for k, v in dev.items() if not v < tol}
        if bad:
            raise ValueError(f"not a regular simplex frame: {bad}")
        return dev


def build_frame(n: int) -> Frame:
    """
    Canonical regular simplex frame for ``n`` vertices.

    The centered basis vectors ``e_i - 1/n`` are written in an orthonormal
    basis of the complement of the all-ones vector (QR of the first ``n-1``
    centered columns) and rescaled to unit length.
    """
    if int(n) != n or n < 3:
        raise ValueError(f"regular simplex frames need n >= 3, got {n}")
    n = int(n)
    C = np.eye(n) - np.full((n, n), 1.0 / n)
    Q, _ = householder_qr(C[:, : n - 1], full=False)
    W = Q.T @ C
    W /= np.linalg.norm(W, axis=0)
    frame = Frame(n, W)
    frame.check()
    return frame


def gram(frame: Frame) -> np.ndarray:
    """``W^T W``, which equals ``n/(n-1) * (I - J/n)``."""
    return frame.W.T @ frame.W
