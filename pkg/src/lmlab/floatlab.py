"""Floating-point reduction order as an experimental variable.

A ReductionPlan names an exact association order (and precision) for summing
an array; reduce() executes precisely that order, so every result is a
deterministic function of (data, plan). Different plans legitimately return
different bits: that is the point. batch_simulation models the serving-stack
version of the effect, where a request's reduction layout depends on how many
requests were batched with it; deterministic_mode_reduce is the cure, a chunk
layout that ignores batch context entirely.

The hardware setting is modeled, not reproduced: a fixed lane count stands in
for a parallel kernel's strategy choices. float32 is available because it
shows discrepancies at much smaller magnitude spreads than float64.
"""

import csv
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels, numkit

STRATEGIES = ("sequential", "pairwise_tree", "chunked", "shuffled")
PRECISIONS = ("float32", "float64")

LANES = 64  # modeled accumulator lanes on the pretend parallel machine


@dataclass(frozen=True)
class ReductionPlan:
    strategy: str
    precision: str = "float64"
    chunk_size: int = None
    seed: int = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"unknown precision {self.precision!r}")
        if self.strategy == "chunked":
            if self.chunk_size is None or self.chunk_size < 1:
                raise ValueError("chunked plan needs chunk_size >= 1")
        if self.strategy == "shuffled" and self.seed is None:
            raise ValueError("shuffled plan needs a seed")

    def label(self) -> str:
        extra = ""
        if self.strategy == "chunked":
            extra = f"({self.chunk_size})"
        elif self.strategy == "shuffled":
            extra = f"(seed={self.seed})"
        return f"{self.strategy}{extra}:{self.precision}"


def _seq32(v: np.ndarray) -> np.float32:
    s = v[0]
    for i in range(1, v.shape[0]):
        s = np.float32(s + v[i])
    return np.float32(s)


def _pairwise32(v: np.ndarray, lo: int, n: int) -> np.float32:
    if n == 1:
        return v[lo]
    if n == 2:
        return np.float32(v[lo] + v[lo + 1])
    half = n // 2
    return np.float32(
        _pairwise32(v, lo, half) + _pairwise32(v, lo + half, n - half)
    )


def _chunked32(v: np.ndarray, chunk: int) -> np.float32:
    partials = []
    for lo in range(0, v.shape[0], chunk):
        partials.append(_seq32(v[lo:lo + chunk]))
    total = partials[0]
    for p in partials[1:]:
        total = np.float32(total + p)
    return np.float32(total)


def reduce(data, plan: ReductionPlan):
    """Sum data under exactly the plan's association order.

    Returns a Python float for float64 plans, np.float32 for float32 plans.
    """
    if plan.precision == "float64":
        arr = np.ascontiguousarray(data, dtype=np.float64)
    else:
        arr = np.ascontiguousarray(data, dtype=np.float32)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ValueError("reduce expects a nonempty 1-D array")
    if plan.strategy == "shuffled":
        perm = numkit.make_rng(plan.seed).permutation(arr.shape[0])
        arr = arr[perm]
    if plan.precision == "float64":
        if plan.strategy == "pairwise_tree":
            return _kernels.reduce_pairwise(arr)
        if plan.strategy == "chunked":
            return _kernels.reduce_chunked(arr, plan.chunk_size)
        return _kernels.reduce_seq(arr)
    if plan.strategy == "pairwise_tree":
        return _pairwise32(arr, 0, arr.shape[0])
    if plan.strategy == "chunked":
        return _chunked32(arr, plan.chunk_size)
    return _seq32(arr)


def deterministic_mode_reduce(data, fixed_chunk: int) -> float:
    """Chunked float64 reduction whose layout ignores any batching context.

    Same data + same fixed_chunk means same bits, whatever else is running.
    With fixed_chunk >= len(data) this is exactly the sequential sum.
    """
    if fixed_chunk < 1:
        raise ValueError("fixed_chunk must be >= 1")
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ValueError("reduce expects a nonempty 1-D array")
    return _kernels.reduce_chunked(arr, fixed_chunk)


def float_bits_hex(value, precision: str = "float64") -> str:
    """Bit pattern of a float as hex, the honest way to compare results."""
    if precision == "float64":
        return struct.pack("<d", float(value)).hex()
    if precision == "float32":
        return struct.pack("<f", float(value)).hex()
    raise ValueError(f"unknown precision {precision!r}")


@dataclass
class DiscrepancyReport:
    values: list              # [(label, value)]
    max_abs_diff: float
    bitwise_identical: bool
    precision: str = "float64"


def _report_from_groups(groups, precision: str) -> DiscrepancyReport:
    """groups: [(label, value)] entries that are supposed to agree."""
    values = [v for _, v in groups]
    bits = {float_bits_hex(v, precision) for v in values}
    max_diff = 0.0
    for a in values:
        for b in values:
            d = abs(float(a) - float(b))
            if d > max_diff:
                max_diff = d
    return DiscrepancyReport(
        values=list(groups),
        max_abs_diff=max_diff,
        bitwise_identical=(len(bits) == 1),
        precision=precision,
    )


def compare_plans(data, plans) -> DiscrepancyReport:
    """Reduce one array under several plans and compare the results."""
    plans = list(plans)
    if not plans:
        raise ValueError("need at least one plan")
    precision = plans[0].precision
    if any(p.precision != precision for p in plans):
        raise ValueError("compare_plans needs a single precision")
    rows = [(p.label(), reduce(data, p)) for p in plans]
    return _report_from_groups(rows, precision)


def batch_chunk_size(length: int, batch_size: int, lanes: int = LANES) -> int:
    """The modeled kernel's chunk for one request inside a batch of B.

    A batch of B requests splits the lanes; fewer lanes per request means
    longer sequential chunks. This is what makes results batch-dependent.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    lanes_per_request = max(1, lanes // batch_size)
    return max(1, math.ceil(length / lanes_per_request))


def batch_simulation(requests, batch_sizes, plan_family: str = "chunked",
                     precision: str = "float64") -> DiscrepancyReport:
    """Reduce every request under each batch size's layout and compare.

    batch_sizes may be a single int (compared against batch size 1) or a list.
    The report's values carry one entry per (request, batch size); the
    identity flag is True only if every request agrees across all sizes.
    """
    if plan_family != "chunked":
        raise ValueError(f"unknown plan family {plan_family!r}")
    if isinstance(batch_sizes, int):
        batch_sizes = sorted({1, batch_sizes})
    sizes = [int(b) for b in batch_sizes]
    if not sizes or any(b < 1 for b in sizes):
        raise ValueError("batch sizes must be >= 1")
    requests = [np.ascontiguousarray(r, dtype=np.float64) for r in requests]
    if not requests:
        raise ValueError("need at least one request")
    rows = []
    all_identical = True
    worst = 0.0
    for ri, req in enumerate(requests):
        per_size = []
        for b in sizes:
            chunk = batch_chunk_size(req.shape[0], b)
            value = reduce(
                req, ReductionPlan("chunked", precision, chunk_size=chunk)
            )
            per_size.append((f"request{ri}@batch={b}", value))
        sub = _report_from_groups(per_size, precision)
        all_identical = all_identical and sub.bitwise_identical
        worst = max(worst, sub.max_abs_diff)
        rows.extend(per_size)
    return DiscrepancyReport(
        values=rows, max_abs_diff=worst,
        bitwise_identical=all_identical, precision=precision,
    )


def report_to_csv(path: str, report: DiscrepancyReport) -> None:
    """label, decimal, hex bit pattern; one row per value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "value", "bits_hex"])
        for label, value in report.values:
            w.writerow([label, repr(float(value)),
                        float_bits_hex(value, report.precision)])
        w.writerow(["max_abs_diff", repr(report.max_abs_diff), ""])
        w.writerow(["bitwise_identical", str(report.bitwise_identical).lower(), ""])


# ---------------------------------------------------------------------------
# corpora for demos and tests

NONASSOC_WITNESS = np.array([1e20, -1e20, 1.0])


def spread_requests(seed: int, n_requests: int, length: int,
                    decades: float = 12.0):
    """Requests with wide magnitude spread; batch layouts will disagree."""
    rng = numkit.make_rng(seed)
    out = []
    for _ in range(n_requests):
        mags = 10.0 ** rng.uniform(0.0, decades, size=length)
        signs = rng.choice([-1.0, 1.0], size=length)
        out.append(mags * signs)
    return out


def integer_requests(seed: int, n_requests: int, length: int,
                     bound: int = 1000):
    """Small-integer-valued requests: every association order is exact."""
    rng = numkit.make_rng(seed)
    return [
        rng.integers(-bound, bound + 1, size=length).astype(np.float64)
        for _ in range(n_requests)
    ]
