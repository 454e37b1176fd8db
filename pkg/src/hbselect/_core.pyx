# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled least-squares kernels on a centered Gram matrix.

Same contract as `_core_py`: incremental Cholesky over an independent
column basis with dependent-column skipping, single-column RSS deltas,
and a from-scratch subset RSS.  Tight C loops beat the BLAS-backed numpy
fallback at branch-and-bound node sizes, where call overhead dominates.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "c"
RANK_TOL = 1e-10

cdef double _TOL = 1e-10


cdef class CholState:
    """Incremental Cholesky of G restricted to an ordered column basis."""

    cdef const double[:, ::1] g
    cdef const double[::1] c
    cdef double tss
    cdef double[:, ::1] r
    cdef double[::1] w
    cdef long long[::1] basis
    cdef double[::1] u
    cdef Py_ssize_t m_
    cdef Py_ssize_t cap

    def __init__(self, g, c, tss, capacity=None):
        g_arr = np.ascontiguousarray(g, dtype=np.float64)
        c_arr = np.ascontiguousarray(c, dtype=np.float64)
        cap = g_arr.shape[0] if capacity is None else int(capacity)
        self.g = g_arr
        self.c = c_arr
        self.tss = float(tss)
        self.r = np.zeros((cap, cap))
        self.w = np.zeros(cap)
        self.basis = np.zeros(cap, dtype=np.int64)
        self.u = np.zeros(cap)
        self.m_ = 0
        self.cap = cap

    @property
    def m(self):
        return self.m_

    def reset(self):
        self.m_ = 0

    def mark(self):
        return self.m_

    def rollback(self, mark):
        self.m_ = mark

    @property
    def rss(self):
        cdef Py_ssize_t i
        cdef double acc = self.tss
        for i in range(self.m_):
            acc -= self.w[i] * self.w[i]
        return acc if acc > 0.0 else 0.0

    cdef bint _project(self, Py_ssize_t j) noexcept:
        # Forward solve R'u = G[basis, j] into self.u[:m]; True if any work done.
        cdef Py_ssize_t i, t, m = self.m_
        cdef double s
        for i in range(m):
            s = self.g[self.basis[i], j]
            for t in range(i):
                s -= self.r[t, i] * self.u[t]
            self.u[i] = s / self.r[i, i]
        return True

    def add(self, j):
        """Append column j; returns False when j is dependent on the basis."""
        cdef Py_ssize_t jj = j
        cdef Py_ssize_t i, m = self.m_
        cdef double gjj, d2, d, s
        if m >= self.cap:
            raise ValueError("CholState capacity exhausted")
        gjj = self.g[jj, jj]
        self._project(jj)
        d2 = gjj
        for i in range(m):
            d2 -= self.u[i] * self.u[i]
        if gjj <= 0.0 or d2 <= _TOL * gjj:
            return False
        d = sqrt(d2)
        s = self.c[jj]
        for i in range(m):
            self.r[i, m] = self.u[i]
            s -= self.u[i] * self.w[i]
        self.r[m, m] = d
        self.w[m] = s / d
        self.basis[m] = jj
        self.m_ = m + 1
        return True

    def deltas(self, free):
        """RSS change from adding each free column alone (<= 0; 0 if dependent)."""
        free_arr = np.ascontiguousarray(free, dtype=np.int64)
        out = np.zeros(free_arr.shape[0])
        cdef long long[::1] fv = free_arr
        cdef double[::1] ov = out
        cdef Py_ssize_t k, i, jj, m = self.m_
        cdef double gjj, d2, corr
        for k in range(fv.shape[0]):
            jj = fv[k]
            gjj = self.g[jj, jj]
            self._project(jj)
            d2 = gjj
            corr = self.c[jj]
            for i in range(m):
                d2 -= self.u[i] * self.u[i]
                corr -= self.u[i] * self.w[i]
            if gjj > 0.0 and d2 > _TOL * gjj:
                ov[k] = -(corr * corr) / d2
            else:
                ov[k] = 0.0
        return out

    def delta_add(self, j):
        return float(self.deltas(np.array([j], dtype=np.int64))[0])


def subset_rss(g, c, tss, idx):
    """RSS of least squares on the columns `idx` of the centered problem."""
    g_arr = np.ascontiguousarray(g, dtype=np.float64)
    c_arr = np.ascontiguousarray(c, dtype=np.float64)
    idx_arr = np.ascontiguousarray(idx, dtype=np.int64)
    cdef const double[:, ::1] gv = g_arr
    cdef const double[::1] cv = c_arr
    cdef long long[::1] iv = idx_arr
    cdef Py_ssize_t k = iv.shape[0]
    r_arr = np.zeros((k, k))
    w_arr = np.zeros(k)
    b_arr = np.zeros(k, dtype=np.int64)
    u_arr = np.zeros(k)
    cdef double[:, ::1] r = r_arr
    cdef double[::1] w = w_arr
    cdef long long[::1] basis = b_arr
    cdef double[::1] u = u_arr
    cdef Py_ssize_t pos, i, t, jj, m = 0
    cdef double gjj, d2, d, s, acc
    for pos in range(k):
        jj = iv[pos]
        gjj = gv[jj, jj]
        for i in range(m):
            s = gv[basis[i], jj]
            for t in range(i):
                s -= r[t, i] * u[t]
            u[i] = s / r[i, i]
        d2 = gjj
        for i in range(m):
            d2 -= u[i] * u[i]
        if gjj <= 0.0 or d2 <= _TOL * gjj:
            continue
        d = sqrt(d2)
        s = cv[jj]
        for i in range(m):
            r[i, m] = u[i]
            s -= u[i] * w[i]
        r[m, m] = d
        w[m] = s / d
        basis[m] = jj
        m += 1
    acc = float(tss)
    for i in range(m):
        acc -= w[i] * w[i]
    return acc if acc > 0.0 else 0.0
