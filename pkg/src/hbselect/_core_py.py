"""Pure-numpy least-squares kernels on a centered Gram matrix.

This is the fallback implementation of the hot kernels used by the
branch-and-bound search, stepwise moves, and the subset enumerator; the
compiled `_core` extension provides the same API.  Everything works on
the centered problem: G = Xc'Xc, c = Xc'yc, tss = yc'yc, so the
intercept never appears explicitly.

The support is maintained as an incremental Cholesky factor R of the
Gram submatrix over an independent column basis.  A column whose squared
residual norm after projection falls below RANK_TOL times its diagonal
is linearly dependent on the basis: it is accepted into the support but
changes neither the factor nor the RSS.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

BACKEND = "python"
RANK_TOL = 1e-10


class CholState:
    """Incremental Cholesky of G restricted to an ordered column basis.

    Append-only; `mark`/`rollback` undo trailing additions, which is all
    the search needs.  Not shareable mid-update.
    """

    __slots__ = ("g", "c", "tss", "r", "w", "basis", "m")

    def __init__(self, g: np.ndarray, c: np.ndarray, tss: float, capacity: int | None = None):
        cap = g.shape[0] if capacity is None else capacity
        self.g = g
        self.c = c
        self.tss = float(tss)
        self.r = np.zeros((cap, cap))
        self.w = np.zeros(cap)
        self.basis = np.zeros(cap, dtype=np.int64)
        self.m = 0

    def reset(self) -> None:
        self.m = 0

    def mark(self) -> int:
        return self.m

    def rollback(self, mark: int) -> None:
        self.m = mark

    @property
    def rss(self) -> float:
        m = self.m
        return max(self.tss - float(self.w[:m] @ self.w[:m]), 0.0)

    def add(self, j: int) -> bool:
        """Append column j; returns False when j is dependent on the basis."""
        m = self.m
        gjj = self.g[j, j]
        if m == 0:
            u = None
            d2 = gjj
        else:
            v = self.g[self.basis[:m], j]
            u = solve_triangular(self.r[:m, :m], v, trans="T", lower=False, check_finite=False)
            d2 = gjj - float(u @ u)
        if gjj <= 0.0 or d2 <= RANK_TOL * gjj:
            return False
        d = np.sqrt(d2)
        if m > 0:
            self.r[:m, m] = u
            self.w[m] = (self.c[j] - float(u @ self.w[:m])) / d
        else:
            self.w[0] = self.c[j] / d
        self.r[m, m] = d
        self.basis[m] = j
        self.m = m + 1
        return True

    def deltas(self, free: np.ndarray) -> np.ndarray:
        """RSS change from adding each free column alone (<= 0; 0 if dependent)."""
        free = np.asarray(free, dtype=np.int64)
        diag = self.g[free, free]
        m = self.m
        if m == 0:
            d2 = diag.copy()
            corr = self.c[free].copy()
        else:
            v = self.g[np.ix_(self.basis[:m], free)]
            u = solve_triangular(self.r[:m, :m], v, trans="T", lower=False, check_finite=False)
            d2 = diag - np.einsum("ij,ij->j", u, u)
            corr = self.c[free] - u.T @ self.w[:m]
        ok = (diag > 0.0) & (d2 > RANK_TOL * diag)
        out = np.zeros(free.shape[0])
        np.divide(-(corr * corr), d2, out=out, where=ok)
        return np.where(ok, out, 0.0)

    def delta_add(self, j: int) -> float:
        return float(self.deltas(np.array([j], dtype=np.int64))[0])


def subset_rss(g: np.ndarray, c: np.ndarray, tss: float, idx: np.ndarray) -> float:
    """RSS of least squares on the columns `idx` of the centered problem."""
    idx = np.asarray(idx, dtype=np.int64)
    state = CholState(g, c, tss, capacity=idx.shape[0])
    for j in idx:
        state.add(int(j))
    return state.rss
