# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the pyref kernels.

Bit-identical to pyref by construction: same association order, compiled with
-O2 -ffp-contract=off (no fast-math, no FMA contraction), so every floating
add and multiply rounds exactly like the interpreted version.
"""

import numpy as np

from libc.math cimport fabs


cdef inline double[::1] _as_f64_1d(object a) except *:
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D array")
    return arr


cdef inline double[:, ::1] _as_f64_2d(object a) except *:
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array")
    return arr


def reduce_seq(a):
    """Sum in strictly ascending index order."""
    cdef double[::1] v = _as_f64_1d(a)
    cdef Py_ssize_t i, n = v.shape[0]
    if n == 0:
        raise ValueError("empty reduction")
    cdef double s = v[0]
    for i in range(1, n):
        s = s + v[i]
    return s


cdef double _pairwise(double[::1] v, Py_ssize_t lo, Py_ssize_t n) noexcept:
    if n == 1:
        return v[lo]
    if n == 2:
        return v[lo] + v[lo + 1]
    cdef Py_ssize_t half = n // 2
    return _pairwise(v, lo, half) + _pairwise(v, lo + half, n - half)


def reduce_pairwise(a):
    """Balanced-tree sum: split at n // 2, left subtree added first."""
    cdef double[::1] v = _as_f64_1d(a)
    if v.shape[0] == 0:
        raise ValueError("empty reduction")
    return _pairwise(v, 0, v.shape[0])


def reduce_chunked(a, Py_ssize_t chunk):
    """Sequential sums of fixed-size chunks, then a sequential sum of partials."""
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    cdef double[::1] v = _as_f64_1d(a)
    cdef Py_ssize_t n = v.shape[0]
    if n == 0:
        raise ValueError("empty reduction")
    cdef Py_ssize_t nchunks = (n + chunk - 1) // chunk
    cdef double[::1] partials = np.empty(nchunks, dtype=np.float64)
    cdef Py_ssize_t c, lo, hi, i
    cdef double s, t
    for c in range(nchunks):
        lo = c * chunk
        hi = lo + chunk
        if hi > n:
            hi = n
        s = v[lo]
        for i in range(lo + 1, hi):
            s = s + v[i]
        partials[c] = s
    t = partials[0]
    for c in range(1, nchunks):
        t = t + partials[c]
    return t


def dot_seq(x, y):
    """Dot product with products accumulated in ascending index order."""
    cdef double[::1] xv = _as_f64_1d(x)
    cdef double[::1] yv = _as_f64_1d(y)
    cdef Py_ssize_t i, n = xv.shape[0]
    if n != yv.shape[0]:
        raise ValueError("dot: length mismatch")
    if n == 0:
        return 0.0
    cdef double s = xv[0] * yv[0]
    for i in range(1, n):
        s = s + xv[i] * yv[i]
    return s


def matmul_seq(a, b):
    """Matrix product with each inner reduction in ascending k order."""
    cdef double[:, ::1] am = _as_f64_2d(a)
    cdef double[:, ::1] bm = _as_f64_2d(b)
    cdef Py_ssize_t n = am.shape[0], kk = am.shape[1]
    cdef Py_ssize_t m = bm.shape[1]
    if kk != bm.shape[0]:
        raise ValueError("matmul: inner dimensions differ")
    out = np.zeros((n, m), dtype=np.float64)
    if kk == 0:
        return out
    cdef double[:, ::1] cv = out
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(n):
        for j in range(m):
            s = am[i, 0] * bm[0, j]
            for k in range(1, kk):
                s = s + am[i, k] * bm[k, j]
            cv[i, j] = s
    return out


def pair_stats(rows, double eps):
    """Over all i < j: count |dot| > eps and track the max |dot|."""
    cdef double[:, ::1] r = _as_f64_2d(rows)
    cdef Py_ssize_t n = r.shape[0], d = r.shape[1]
    if n < 2 or d == 0:
        return 0, 0.0
    cdef Py_ssize_t i, j, k
    cdef double s, a, mx = 0.0
    cdef long long viol = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = r[i, 0] * r[j, 0]
            for k in range(1, d):
                s = s + r[i, k] * r[j, k]
            a = fabs(s)
            if a > mx:
                mx = a
            if a > eps:
                viol += 1
    return int(viol), mx


def any_abs_dot_above(rows, Py_ssize_t m, v, double cap):
    """True if |rows[i] . v| > cap for any i < m; early exit on first hit."""
    cdef double[:, ::1] r = _as_f64_2d(rows)
    if m > r.shape[0]:
        raise ValueError("m exceeds row count")
    cdef double[::1] vv = _as_f64_1d(v)
    cdef Py_ssize_t d = vv.shape[0]
    if r.shape[1] != d:
        raise ValueError("dimension mismatch")
    if d == 0:
        return False
    cdef Py_ssize_t i, k
    cdef double s
    for i in range(m):
        s = r[i, 0] * vv[0]
        for k in range(1, d):
            s = s + r[i, k] * vv[k]
        if fabs(s) > cap:
            return True
    return False
