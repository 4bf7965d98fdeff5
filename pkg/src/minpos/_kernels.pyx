# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: simplex pivoting, Bellman recursion, rollout, power bracket.

Mirrors minpos._kernels_py, which documents the kernel contracts.  Loops are
written out elementwise; no BLAS calls, so per-iteration overhead stays flat
for the small matrices this package targets.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, INFINITY

BACKEND_NAME = "c"


cdef void _pivot(double[:, ::1] T, Py_ssize_t row, Py_ssize_t col) noexcept nogil:
    cdef Py_ssize_t nrows = T.shape[0]
    cdef Py_ssize_t ncols = T.shape[1]
    cdef Py_ssize_t i, k
    cdef double piv = T[row, col]
    cdef double factor
    for k in range(ncols):
        T[row, k] /= piv
    for i in range(nrows):
        if i == row:
            continue
        factor = T[i, col]
        if factor != 0.0:
            for k in range(ncols):
                T[i, k] -= factor * T[row, k]
    for i in range(nrows):
        T[i, col] = 0.0
    T[row, col] = 1.0


def simplex_loop(double[:, ::1] T, cnp.int64_t[::1] basis, double pivot_tol,
                 long long max_pivots, long long pivots):
    cdef Py_ssize_t nrows = T.shape[0] - 1
    cdef Py_ssize_t rhs = T.shape[1] - 1
    cdef Py_ssize_t col, row, i, k
    cdef double ratio, best
    while True:
        col = -1
        for k in range(rhs):
            if T[nrows, k] > pivot_tol:
                col = k
                break
        if col < 0:
            return 0, -1, pivots
        row = -1
        best = 0.0
        for i in range(nrows):
            if T[i, col] > pivot_tol:
                ratio = T[i, rhs] / T[i, col]
                if row < 0 or ratio < best or (ratio == best and basis[i] < basis[row]):
                    row = i
                    best = ratio
        if row < 0:
            return 1, col, pivots
        if pivots >= max_pivots:
            return 2, col, pivots
        _pivot(T, row, col)
        basis[row] = col
        pivots += 1


def value_iter_chunk(const double[:, ::1] AT, const double[:, ::1] BT,
                     const double[:, ::1] ET, const double[:, ::1] FT,
                     const double[::1] s, const double[::1] r,
                     const double[::1] gamma, double[::1] p,
                     double[:, ::1] out, double tol, double feas_tol,
                     double bound):
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t m = r.shape[0]
    cdef Py_ssize_t l = gamma.shape[0]
    cdef Py_ssize_t steps = out.shape[0]
    cdef Py_ssize_t k, i, j, comp
    cdef double acc, excess, worst, delta, diff, top
    cdef double[::1] q = np.empty(m, dtype=np.float64)
    delta = INFINITY
    for k in range(steps):
        comp = 0
        worst = -INFINITY
        for i in range(l):
            acc = 0.0
            for j in range(n):
                acc += FT[i, j] * p[j]
            excess = acc - gamma[i]
            if excess > worst:
                worst = excess
                comp = i
        if worst > feas_tol:
            return 2, k, 0.0, comp
        for i in range(m):
            acc = r[i]
            for j in range(n):
                acc += BT[i, j] * p[j]
            q[i] = acc
        for i in range(n):
            acc = s[i]
            for j in range(n):
                acc += AT[i, j] * p[j]
            for j in range(m):
                acc -= ET[i, j] * fabs(q[j])
            out[k, i] = acc
        delta = 0.0
        top = 0.0
        for i in range(n):
            diff = fabs(out[k, i] - p[i])
            if diff > delta:
                delta = diff
            p[i] = out[k, i]
            diff = fabs(p[i])
            if diff > top:
                top = diff
        if top != top or top > bound:
            return 3, k + 1, delta, -1
        if delta <= tol:
            return 1, k + 1, delta, -1
    return 0, steps, delta, -1


def rollout_steps(const double[:, ::1] A, const double[:, ::1] B,
                  const double[:, ::1] F, const double[:, ::1] K,
                  const double[::1] s, const double[::1] r,
                  const double[::1] gamma, const double[:, ::1] W,
                  double[:, ::1] X, double[:, ::1] U, double[::1] C):
    cdef Py_ssize_t horizon = W.shape[0]
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t m = K.shape[0]
    cdef Py_ssize_t l = gamma.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double acc, stage
    with nogil:
        for t in range(horizon):
            stage = 0.0
            for i in range(m):
                acc = 0.0
                for j in range(n):
                    acc += K[i, j] * X[t, j]
                U[t, i] = -acc
            for i in range(n):
                stage += s[i] * X[t, i]
            for i in range(m):
                stage += r[i] * U[t, i]
            for i in range(l):
                stage -= gamma[i] * W[t, i]
            C[t + 1] = C[t] + stage
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += A[i, j] * X[t, j]
                for j in range(m):
                    acc += B[i, j] * U[t, j]
                for j in range(l):
                    acc += F[i, j] * W[t, j]
                X[t + 1, i] = acc


def power_bracket(const double[:, ::1] M, double[::1] v, double tol,
                  long long max_iter, double floor):
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t i, j
    cdef long long it
    cdef double acc, ratio, lower, upper, top
    cdef double[::1] w = np.empty(n, dtype=np.float64)
    lower = -INFINITY
    upper = INFINITY
    for it in range(1, max_iter + 1):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += M[i, j] * v[j]
            w[i] = acc
        lower = INFINITY
        upper = -INFINITY
        for i in range(n):
            ratio = w[i] / v[i]
            if ratio < lower:
                lower = ratio
            if ratio > upper:
                upper = ratio
        if upper - lower <= tol:
            return lower, upper, it, True
        top = 0.0
        for i in range(n):
            acc = fabs(w[i])
            if acc > top:
                top = acc
        for i in range(n):
            acc = w[i] / top
            if acc < floor:
                acc = floor
            v[i] = acc
    return lower, upper, max_iter, False
