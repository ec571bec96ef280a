"""Timing comparison of the compiled kernels against the pure-python fallback.

Run: python3 benchmarks/bench_kernels.py [--size 256] [--repeats 5]
"""

import argparse
import time

import numpy as np

from pointseg import _kernels_py

try:
    from pointseg import _kernels_c
except ImportError:
    _kernels_c = None


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=256, help="image side length")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    n = args.size
    rng = np.random.default_rng(0)
    rows = []

    coarse = np.ascontiguousarray(rng.random((n // 8, n // 8)))
    guide = np.ascontiguousarray(rng.random((n, n, 4)))
    rows.append(("jbu_filter", (coarse, guide, 1.0, 0.1, 2)))

    field = np.ascontiguousarray(rng.random((n, n)))
    depth = np.ascontiguousarray(rng.random((n, n)))
    rows.append(("geodesic_fill", (field, depth, n // 2, n // 2, 1.0, 4)))

    a = np.ascontiguousarray(rng.random(n * n))
    b = np.full(n * n, np.inf)
    tw = np.ones(n * n, dtype=np.uint8)
    fo = np.zeros(n * n, dtype=np.uint8)
    lams = np.sort(rng.random(512))
    rows.append(("fused_area_scan", (a, b, tw, fo, 1, lams)))

    print(f"size {n}x{n}, best of {args.repeats}")
    print(f"{'kernel':<18}{'pure (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, callargs in rows:
        t_py = _time(getattr(_kernels_py, name), *callargs, repeats=args.repeats)
        if _kernels_c is None:
            print(f"{name:<18}{t_py:>12.4f}{'n/a':>12}{'n/a':>10}")
            continue
        t_c = _time(getattr(_kernels_c, name), *callargs, repeats=args.repeats)
        print(f"{name:<18}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
