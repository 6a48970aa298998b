"""Dense linear algebra with pinned reduction order, plus the project RNG.

Matrices are 2-D numpy arrays, vectors 1-D; the dtype is the field tag
(float64 for the real field, complex128 for the complex field). All values
are treated as immutable once built. Real-field hot paths go through the
kernel backend; complex paths use the same ascending-order loops in Python
(they only ever see small matrices).

RNG: one algorithm for the whole project, Philox 4x64 (counter-based), wrapped
in numpy Generators. Child streams come from SeedSequence splitting, never
from seed arithmetic.
"""

import csv
import math
import struct

import numpy as np

from . import _kernels

RNG_ALGORITHM = "philox4x64"

_REAL = np.dtype(np.float64)
_COMPLEX = np.dtype(np.complex128)


# ---------------------------------------------------------------------------
# RNG


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator for a 64-bit seed; same seed, same stream, forever."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, n: int) -> list:
    """n independent child generators derived by splitting the root seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.Philox(ss)) for ss in children]


# ---------------------------------------------------------------------------
# field handling


def field_of(a) -> str:
    """'real' for float arrays, 'complex' for complex arrays."""
    dt = np.asarray(a).dtype
    if dt.kind == 'c':
        return "complex"
    if dt.kind in 'fiu':
        return "real"
    raise ValueError(f"unsupported scalar field: {dt}")


def _coerce(a):
    arr = np.asarray(a)
    if arr.dtype.kind == 'c':
        return np.ascontiguousarray(arr, dtype=_COMPLEX)
    return np.ascontiguousarray(arr, dtype=_REAL)


# ---------------------------------------------------------------------------
# products


def matmul(a, b) -> np.ndarray:
    """Standard product; inner reductions in strictly ascending index order."""
    am = _coerce(a)
    bm = _coerce(b)
    if am.ndim != 2 or bm.ndim != 2:
        raise ValueError("matmul expects 2-D matrices")
    if am.shape[1] != bm.shape[0]:
        raise ValueError(
            f"matmul: inner dimensions differ ({am.shape} x {bm.shape})"
        )
    if field_of(am) != field_of(bm):
        raise ValueError("matmul: mixed real/complex operands")
    if am.dtype == _REAL:
        return _kernels.matmul_seq(am, bm)
    return _matmul_complex(am, bm)


def _matmul_complex(am, bm) -> np.ndarray:
    n, kk = am.shape
    m = bm.shape[1]
    out = np.zeros((n, m), dtype=_COMPLEX)
    if kk == 0:
        return out
    for i in range(n):
        for j in range(m):
            s = am[i, 0] * bm[0, j]
            for k in range(1, kk):
                s = s + am[i, k] * bm[k, j]
            out[i, j] = s
    return out


def matvec(a, x) -> np.ndarray:
    """a @ x for a 1-D x, through the same order-pinned product."""
    xv = _coerce(x)
    if xv.ndim != 1:
        raise ValueError("matvec expects a 1-D vector")
    return matmul(a, xv.reshape(-1, 1))[:, 0]


def inner(u, v):
    """sum_i conj(u_i) * v_i, accumulated in ascending index order."""
    uv = _coerce(u)
    vv = _coerce(v)
    if uv.ndim != 1 or vv.ndim != 1:
        raise ValueError("inner expects 1-D vectors")
    if uv.shape[0] != vv.shape[0]:
        raise ValueError("inner: dimension mismatch")
    if uv.dtype == _REAL and vv.dtype == _REAL:
        return _kernels.dot_seq(uv, vv)
    uc = uv.astype(_COMPLEX)
    vc = vv.astype(_COMPLEX)
    n = uc.shape[0]
    if n == 0:
        return complex(0.0)
    s = np.conj(uc[0]) * vc[0]
    for i in range(1, n):
        s = s + np.conj(uc[i]) * vc[i]
    return complex(s)


def norm(v) -> float:
    """Euclidean norm via the sequential reduction."""
    vv = _coerce(v)
    if vv.ndim != 1:
        raise ValueError("norm expects a 1-D vector")
    if vv.shape[0] == 0:
        return 0.0
    if vv.dtype == _REAL:
        return math.sqrt(_kernels.dot_seq(vv, vv))
    return math.sqrt(abs(inner(vv, vv)))


def frob_norm(m) -> float:
    """Frobenius norm; real case reduces the flattened squares sequentially."""
    mm = _coerce(m)
    return norm(mm.reshape(-1))


def polarization_inner(u, v) -> float:
    """u . v recovered as (|u|^2 + |v|^2 - |u - v|^2) / 2; real field only."""
    uv = _coerce(u)
    vv = _coerce(v)
    if uv.dtype != _REAL or vv.dtype != _REAL:
        raise ValueError("polarization identity is stated for the real field")
    if uv.shape != vv.shape or uv.ndim != 1:
        raise ValueError("polarization_inner: dimension mismatch")
    nu = _kernels.dot_seq(uv, uv)
    nv = _kernels.dot_seq(vv, vv)
    d = uv - vv
    nd = _kernels.dot_seq(d, d)
    return 0.5 * (nu + nv - nd)


# ---------------------------------------------------------------------------
# random unit vectors

_MAX_REDRAWS = 64


def random_unit_vectors(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """n rows of rotation-invariant unit vectors (normalized Gaussians)."""
    if n < 1 or d < 1:
        raise ValueError("random_unit_vectors: n and d must be >= 1")
    out = np.empty((n, d), dtype=_REAL)
    for i in range(n):
        out[i] = _one_unit_vector(rng, d)
    return out


def _one_unit_vector(rng, d: int) -> np.ndarray:
    for _ in range(_MAX_REDRAWS):
        g = rng.standard_normal(d)
        nrm = math.sqrt(_kernels.dot_seq(g, g))
        if nrm > 0.0 and math.isfinite(nrm):
            return g / nrm
    raise RuntimeError("random_unit_vectors: zero-norm draws persisted")


# ---------------------------------------------------------------------------
# serialization (real matrices)


def save_matrix_csv(path, m) -> None:
    """One row per line, '.' decimal, repr precision (exact round trip)."""
    mm = _coerce(m)
    if mm.ndim != 2 or mm.dtype != _REAL:
        raise ValueError("save_matrix_csv expects a real 2-D matrix")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in mm:
            w.writerow([repr(float(x)) for x in row])


def load_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if rec:
                rows.append([float(x) for x in rec])
    if not rows:
        return np.zeros((0, 0), dtype=_REAL)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged CSV matrix in {path}")
    return np.array(rows, dtype=_REAL)


_BIN_HEADER = struct.Struct("<II")  # rows, cols; 8 bytes, little endian


def save_matrix_bin(path, m) -> None:
    """Raw little-endian float64, row-major, after an 8-byte dims header."""
    mm = _coerce(m)
    if mm.ndim != 2 or mm.dtype != _REAL:
        raise ValueError("save_matrix_bin expects a real 2-D matrix")
    rows, cols = mm.shape
    with open(path, "wb") as fh:
        fh.write(_BIN_HEADER.pack(rows, cols))
        fh.write(mm.astype("<f8", copy=False).tobytes(order="C"))


def load_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_BIN_HEADER.size)
        if len(head) != _BIN_HEADER.size:
            raise ValueError(f"truncated matrix header in {path}")
        rows, cols = _BIN_HEADER.unpack(head)
        payload = fh.read()
    expect = rows * cols * 8
    if len(payload) != expect:
        raise ValueError(
            f"matrix payload in {path} is {len(payload)} bytes, expected {expect}"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    return flat.reshape(rows, cols).astype(_REAL)
