"""Pure-Python reference kernels with pinned reduction orders.

Every kernel here has a compiled twin in ``_fast.pyx``.  The pair must be
bit-identical: CPython float arithmetic is IEEE-754 double arithmetic, and the
extension is compiled without fast-math and with FP contraction disabled, so
both backends perform the same rounded operation sequence.  The association
order is the contract, not an implementation detail:

* sequential: ``(((a0 + a1) + a2) + ...)`` in ascending index order
* pairwise:   split at ``n // 2``, recurse, add left + right
* chunked:    sequential inside each chunk, then sequential over partials

Accumulations start from the first term rather than ``0.0`` so signed zeros
survive (``0.0 + (-0.0)`` is ``+0.0``, which would flip bits).
"""

import numpy as np


def _as_f64_1d(a):
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("expected a 1-D array")
    return v


def _as_f64_2d(a):
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-D array")
    return m


def reduce_seq(a) -> float:
    """Sum in strictly ascending index order."""
    v = _as_f64_1d(a).tolist()
    if not v:
        raise ValueError("empty reduction")
    s = v[0]
    for i in range(1, len(v)):
        s = s + v[i]
    return s


def _pairwise(v, lo: int, n: int) -> float:
    if n == 1:
        return v[lo]
    if n == 2:
        return v[lo] + v[lo + 1]
    half = n // 2
    return _pairwise(v, lo, half) + _pairwise(v, lo + half, n - half)


def reduce_pairwise(a) -> float:
    """Balanced-tree sum: split at n // 2, left subtree added first."""
    v = _as_f64_1d(a).tolist()
    if not v:
        raise ValueError("empty reduction")
    return _pairwise(v, 0, len(v))


def reduce_chunked(a, chunk: int) -> float:
    """Sequential sums of fixed-size chunks, then a sequential sum of partials.

    A single chunk (chunk >= len) degenerates to reduce_seq bitwise.
    """
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    v = _as_f64_1d(a).tolist()
    if not v:
        raise ValueError("empty reduction")
    partials = []
    for lo in range(0, len(v), chunk):
        hi = min(lo + chunk, len(v))
        s = v[lo]
        for i in range(lo + 1, hi):
            s = s + v[i]
        partials.append(s)
    t = partials[0]
    for i in range(1, len(partials)):
        t = t + partials[i]
    return t


def dot_seq(x, y) -> float:
    """Dot product with products accumulated in ascending index order."""
    xv = _as_f64_1d(x).tolist()
    yv = _as_f64_1d(y).tolist()
    if len(xv) != len(yv):
        raise ValueError("dot: length mismatch")
    if not xv:
        return 0.0
    s = xv[0] * yv[0]
    for i in range(1, len(xv)):
        s = s + xv[i] * yv[i]
    return s


def matmul_seq(a, b):
    """Matrix product with each inner reduction in ascending k order."""
    am = _as_f64_2d(a)
    bm = _as_f64_2d(b)
    n, kk = am.shape
    k2, m = bm.shape
    if kk != k2:
        raise ValueError("matmul: inner dimensions differ")
    out = np.zeros((n, m), dtype=np.float64)
    if kk == 0:
        return out
    al = am.tolist()
    bl = bm.tolist()
    for i in range(n):
        ai = al[i]
        row = out[i]
        for j in range(m):
            s = ai[0] * bl[0][j]
            for k in range(1, kk):
                s = s + ai[k] * bl[k][j]
            row[j] = s
    return out


def pair_stats(rows, eps: float):
    """Over all i < j: count |dot| > eps and track the max |dot|.

    Each dot uses ascending index order. Returns (violating_pairs, max_abs_dot).
    """
    r = _as_f64_2d(rows)
    n, d = r.shape
    if n < 2 or d == 0:
        return 0, 0.0
    rl = r.tolist()
    viol = 0
    mx = 0.0
    for i in range(n):
        ri = rl[i]
        for j in range(i + 1, n):
            rj = rl[j]
            s = ri[0] * rj[0]
            for k in range(1, d):
                s = s + ri[k] * rj[k]
            a = -s if s < 0.0 else s
            if a > mx:
                mx = a
            if a > eps:
                viol += 1
    return viol, mx


def any_abs_dot_above(rows, m: int, v, cap: float) -> bool:
    """True if |rows[i] . v| > cap for any i < m; early exit on first hit."""
    r = _as_f64_2d(rows)
    if m > r.shape[0]:
        raise ValueError("m exceeds row count")
    vv = _as_f64_1d(v).tolist()
    d = len(vv)
    if r.shape[1] != d:
        raise ValueError("dimension mismatch")
    if d == 0:
        return False
    rl = r[:m].tolist()
    for i in range(m):
        ri = rl[i]
        s = ri[0] * vv[0]
        for k in range(1, d):
            s = s + ri[k] * vv[k]
        a = -s if s < 0.0 else s
        if a > cap:
            return True
    return False
