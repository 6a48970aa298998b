"""Scalar and vector nonlinearities, plus the amplitude map onto unit states.

sigmoid/sigmoid_prime accept scalars or arrays and return the same kind.
softmax is stabilized by max-subtraction, which the shift-invariance property
makes exact up to rounding; its normalizer uses the sequential reduction so
results are bit-stable across kernel backends.
"""

import math

import numpy as np

from . import _kernels


def logit(p: float) -> float:
    """log(p / (1 - p)) on the open interval (0, 1); endpoints rejected."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"logit needs 0 < p < 1, got {p!r}")
    return math.log(p / (1.0 - p))


def sigmoid(z):
    """1 / (1 + exp(-z)), two-branch form so large |z| never overflows."""
    arr = np.asarray(z, dtype=np.float64)
    out = np.empty_like(arr)
    pos = arr >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ez = np.exp(arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    if arr.ndim == 0:
        return float(out)
    return out


def sigmoid_prime(z):
    """sigma(z) * (1 - sigma(z))."""
    s = sigmoid(z)
    return s * (1.0 - s)


def softmax(z) -> np.ndarray:
    """exp(z_i - max) / sum_j exp(z_j - max); rows of probability mass."""
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ValueError("softmax expects a nonempty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("softmax expects finite entries")
    e = np.exp(arr - np.max(arr))
    return e / _kernels.reduce_seq(e)


def softmax_temperature(z, t: float) -> np.ndarray:
    """softmax(z / T). T -> 0 sharpens, T -> inf flattens."""
    if not (t > 0.0):
        raise ValueError(f"temperature must be > 0, got {t!r}")
    arr = np.asarray(z, dtype=np.float64)
    return softmax(arr / t)


def amplitudes_from_logits(z, t: float, phases=None) -> np.ndarray:
    """Unit-norm complex amplitudes with |a_i|^2 = softmax(z / T)_i.

    a_i is proportional to exp(z_i / (2T)) * exp(1j * phi_i); the phases are
    free and never touch the moduli. phases=None means all zero.
    """
    if not (t > 0.0):
        raise ValueError(f"temperature must be > 0, got {t!r}")
    zv = np.asarray(z, dtype=np.float64)
    if phases is None:
        phases = np.zeros_like(zv)
    ph = np.asarray(phases, dtype=np.float64)
    if zv.ndim != 1 or zv.shape[0] < 1:
        raise ValueError("amplitudes_from_logits expects a nonempty 1-D vector")
    if ph.shape != zv.shape:
        raise ValueError("phases must match the logit vector dimension")
    half = (zv - np.max(zv)) / (2.0 * t)
    mag = np.exp(half)
    total = _kernels.reduce_seq(mag * mag)
    a = (mag / math.sqrt(total)) * np.exp(1j * ph)
    return a.astype(np.complex128)
