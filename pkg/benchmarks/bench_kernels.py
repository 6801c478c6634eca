"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--n 1200] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nsdeform import _fallback

try:
    from nsdeform import _core
except ImportError:
    _core = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(n, rng):
    coords = rng.uniform(size=(n, 2))
    z = rng.normal(size=n)
    anchors = rng.uniform(size=(169, 2))
    m = n * (n - 1) // 2
    y, w = rng.normal(size=m), rng.uniform(size=m)
    return {
        "pava_sorted (%d pairs)" % m: lambda b: b.pava_sorted(y, w),
        "kernel_moments (169 x %d)" % n: lambda b: b.kernel_moments(anchors, coords, z, 0.3),
        "leave_two_out (%d, lam=0.3)" % n: lambda b: b.leave_two_out(coords, z, 0.3),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1200, help="number of data points")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<32} {'fallback [s]':>13} {'compiled [s]':>13} {'speed-up':>9}")
    for name, run in cases(args.n, rng).items():
        tf = best_of(lambda: run(_fallback), args.repeat)
        if _core is None:
            print(f"{name:<32} {tf:13.4f} {'n/a':>13} {'n/a':>9}")
            continue
        tc = best_of(lambda: run(_core), args.repeat)
        print(f"{name:<32} {tf:13.4f} {tc:13.4f} {tf / tc:8.1f}x")


if __name__ == "__main__":
    main()
