"""How many nearly-orthogonal directions fit in R^d, and friends.

measure_packing samples unit vectors and counts pairwise inner products above
a threshold. greedy_pack builds an explicit packing witness: it is a lower
bound on the true capacity, never an estimate of it. capacity_curve fits
ln(count) against d, whose slope is the observable the theory predicts grows
like epsilon^2. jl_project is the random-projection side of the same story,
and analogy does feature-direction arithmetic on embedding rows.

greedy_pack termination: the specified stop is max_attempts consecutive
rejections, but for loose thresholds the acceptance rate stays near 1 and that
stop never fires, so a total-acceptance budget (max_accept) bounds the run.
Both knobs appear in every report.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, numkit

MAX_ATTEMPTS_DEFAULT = 2000
MAX_ACCEPT_DEFAULT = 4096


@dataclass
class PackingReport:
    d: int
    epsilon: float
    n_attempted: int
    max_abs_dot: float
    violating_pairs: int
    fraction_violating: float


@dataclass
class CapacityCurve:
    epsilon: float
    points: list              # [(d, achieved_n)] ascending in d
    fitted_slope: float       # least-squares slope of ln N vs d
    r_squared: float
    greedy_counts: list       # raw greedy witnesses, before the basis floor
    max_attempts: int
    max_accept: int


def measure_packing(rng, n: int, d: int, epsilon: float,
                    vectors=None) -> PackingReport:
    """Pairwise |dot| statistics over n random unit vectors.

    vectors: optional injected rows (testing hook, e.g. an orthonormal set);
    they bypass sampling but still go through the same pair scan.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if vectors is None:
        rows = numkit.random_unit_vectors(rng, n, d)
    else:
        rows = np.ascontiguousarray(vectors, dtype=np.float64)
        if rows.shape != (n, d):
            raise ValueError("injected vectors have the wrong shape")
    violating, max_abs = _kernels.pair_stats(rows, epsilon)
    pairs = n * (n - 1) // 2
    return PackingReport(
        d=d, epsilon=epsilon, n_attempted=n,
        max_abs_dot=float(max_abs),
        violating_pairs=int(violating),
        fraction_violating=violating / pairs,
    )


def gaussian_tail_violation_estimate(epsilon: float, d: int) -> float:
    """2 * P(Z > eps * sqrt(d)) for standard normal Z.

    The dot of two random unit vectors in R^d is approximately N(0, 1/d), so
    this estimates the fraction of pairs with |dot| > eps.
    """
    return math.erfc(epsilon * math.sqrt(d) / math.sqrt(2.0))


def greedy_pack(rng, d: int, epsilon: float,
                max_attempts: int = MAX_ATTEMPTS_DEFAULT,
                max_accept: int = MAX_ACCEPT_DEFAULT) -> int:
    """Accept random unit vectors whose |dot| with all accepted stays <= eps.

    Stops after max_attempts consecutive rejections or max_accept accepted
    vectors, whichever comes first. The count is a packing lower bound.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if d < 1:
        raise ValueError("d must be >= 1")
    if max_attempts < 1 or max_accept < 1:
        raise ValueError("budgets must be >= 1")
    buf = np.empty((max_accept, d), dtype=np.float64)
    accepted = 0
    consecutive_rejections = 0
    while accepted < max_accept and consecutive_rejections < max_attempts:
        cand = numkit._one_unit_vector(rng, d)
        if _kernels.any_abs_dot_above(buf, accepted, cand, epsilon):
            consecutive_rejections += 1
        else:
            buf[accepted] = cand
            accepted += 1
            consecutive_rejections = 0
    return accepted


def fit_log_linear(points):
    """Least-squares fit of ln(n) against d: (slope, intercept, r_squared)."""
    if len(points) < 2:
        raise ValueError("need at least two points to fit")
    x = np.array([float(d) for d, _ in points])
    y = np.array([math.log(n) for _, n in points])
    xm = float(x.mean())
    ym = float(y.mean())
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("fit needs at least two distinct dims")
    slope = float(np.sum((x - xm) * (y - ym))) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    sstot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if sstot == 0.0 else 1.0 - float(np.sum(resid**2)) / sstot
    return slope, intercept, r2


def capacity_curve(rng, epsilon: float, dims,
                   max_attempts: int = MAX_ATTEMPTS_DEFAULT,
                   max_accept: int = MAX_ACCEPT_DEFAULT) -> CapacityCurve:
    """greedy_pack per dimension, then the ln N vs d least-squares fit.

    achieved_n floors the greedy witness at d: the standard basis is always a
    valid packing for eps > 0, so d is never an overclaim.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2:
        raise ValueError("need at least two dims")
    if any(d < 2 for d in dims):
        raise ValueError("dims must each be >= 2")
    if sorted(dims) != dims:
        raise ValueError("dims must be ascending")
    greedy_counts = []
    points = []
    for d in dims:
        count = greedy_pack(rng, d, epsilon,
                            max_attempts=max_attempts, max_accept=max_accept)
        greedy_counts.append(count)
        points.append((d, max(count, d)))
    slope, _, r2 = fit_log_linear(points)
    return CapacityCurve(
        epsilon=epsilon, points=points, fitted_slope=slope, r_squared=r2,
        greedy_counts=greedy_counts,
        max_attempts=max_attempts, max_accept=max_accept,
    )


@dataclass
class DistortionStats:
    ratios: np.ndarray   # ||y_i - y_j||^2 / ||x_i - x_j||^2 over distinct pairs
    min_ratio: float
    max_ratio: float


def jl_project(rng, x: np.ndarray, k: int, projection=None):
    """(Y, DistortionStats): Y = X P / sqrt(k) for Gaussian P of shape d x k.

    projection: optional explicit matrix used verbatim (no scaling); passing
    the identity at k = d gives exactly zero distortion, which is the
    calibration hook for the distortion report itself.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("X must be 2-D")
    n, d = x.shape
    if not (1 <= k <= d):
        raise ValueError(f"k must lie in [1, {d}], got {k}")
    if projection is None:
        p = rng.standard_normal((d, k)) / math.sqrt(k)
    else:
        p = np.ascontiguousarray(projection, dtype=np.float64)
        if p.shape != (d, k):
            raise ValueError("projection has the wrong shape")
    y = numkit.matmul(x, p)
    ratios = []
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dist_x = _kernels.dot_seq(dx, dx)
            if dist_x == 0.0:
                continue
            dy = y[i] - y[j]
            ratios.append(_kernels.dot_seq(dy, dy) / dist_x)
    arr = np.array(ratios, dtype=np.float64)
    if arr.size:
        stats = DistortionStats(arr, float(arr.min()), float(arr.max()))
    else:
        stats = DistortionStats(arr, math.nan, math.nan)
    return y, stats


def analogy(emb: np.ndarray, a: int, b: int, c: int) -> int:
    """argmax cosine(row, v(a) - v(b) + v(c)) over rows excluding a, b, c."""
    emb = np.ascontiguousarray(emb, dtype=np.float64)
    if emb.ndim != 2:
        raise ValueError("embedding table must be 2-D")
    n = emb.shape[0]
    for idx in (a, b, c):
        if not (0 <= idx < n):
            raise ValueError(f"index {idx} outside table of {n} rows")
    query = emb[a] - emb[b] + emb[c]
    qn = numkit.norm(query)
    if qn == 0.0:
        raise ValueError("degenerate (zero) query vector")
    best = -1
    best_sim = -math.inf
    excluded = {a, b, c}
    for i in range(n):
        if i in excluded:
            continue
        rn = numkit.norm(emb[i])
        if rn == 0.0:
            continue
        sim = _kernels.dot_seq(emb[i], query) / (rn * qn)
        if sim > best_sim:
            best_sim = sim
            best = i
    if best < 0:
        raise ValueError("no candidate rows remain")
    return best
