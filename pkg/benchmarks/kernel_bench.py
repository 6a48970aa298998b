"""Time the compiled kernels against the pure-Python reference.

Both backends pin the same association order, so every kernel must agree
bit for bit; this script checks that while it times them. Run from the
repository root after installing the package:

    python benchmarks/kernel_bench.py [--scale N] [--reps K]
"""

import argparse
import struct
import time

import numpy as np

from lmlab import numkit
from lmlab._kernels import pyref

try:
    from lmlab._kernels import _fast
except ImportError:
    _fast = None


def bits(x) -> str:
    return struct.pack("<d", float(x)).hex()


def best_of(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=int, default=100_000,
                    help="reduction length (default 100000)")
    ap.add_argument("--reps", type=int, default=3,
                    help="repetitions per timing, best taken (default 3)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = numkit.make_rng(args.seed)
    vec = rng.normal(size=args.scale) * 10.0 ** rng.uniform(-6, 6, args.scale)
    other = rng.normal(size=args.scale)
    side = 48
    a = rng.normal(size=(side, side))
    b = rng.normal(size=(side, side))
    rows = rng.normal(size=(100, 64))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    probe = rng.normal(size=64)
    probe /= np.linalg.norm(probe)

    cases = [
        (f"reduce_seq n={args.scale}", lambda k: k.reduce_seq(vec)),
        (f"reduce_pairwise n={args.scale}", lambda k: k.reduce_pairwise(vec)),
        (f"reduce_chunked(64) n={args.scale}",
         lambda k: k.reduce_chunked(vec, 64)),
        (f"dot_seq n={args.scale}", lambda k: k.dot_seq(vec, other)),
        (f"matmul_seq {side}x{side}", lambda k: k.matmul_seq(a, b)),
        ("pair_stats 100x64", lambda k: k.pair_stats(rows, 0.25)),
        ("any_abs_dot_above 100x64",
         lambda k: k.any_abs_dot_above(rows, 100, probe, 0.25)),
    ]

    if _fast is None:
        print("compiled backend not built; timing the pure-Python reference only")
    header = f"{'kernel':<32} {'python s':>10} {'compiled s':>11} {'speedup':>8} {'agree':>6}"
    print(header)
    print("-" * len(header))
    all_agree = True
    for name, call in cases:
        py_val = call(pyref)
        t_py = best_of(lambda: call(pyref), args.reps)
        if _fast is None:
            print(f"{name:<32} {t_py:>10.4f} {'-':>11} {'-':>8} {'-':>6}")
            continue
        fast_val = call(_fast)
        t_fast = best_of(lambda: call(_fast), args.reps)
        if isinstance(py_val, float):
            agree = bits(py_val) == bits(fast_val)
        elif isinstance(py_val, tuple):
            agree = (py_val[0] == fast_val[0]
                     and bits(py_val[1]) == bits(fast_val[1]))
        elif isinstance(py_val, np.ndarray):
            agree = py_val.tobytes() == np.asarray(fast_val).tobytes()
        else:
            agree = py_val == fast_val
        all_agree = all_agree and agree
        print(f"{name:<32} {t_py:>10.4f} {t_fast:>11.4f} "
              f"{t_py / t_fast:>7.1f}x {('yes' if agree else 'NO'):>6}")
    if _fast is not None and not all_agree:
        print("bitwise disagreement between backends")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
