#!/usr/bin/env python3
"""Benchmark the compiled scan kernels against the pure-Python fallback.

The scan is the hot loop of every vector cache lookup: one query against
all resident entries of its namespace. Run with the package installed:

    python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time
from array import array

from edgecache.kernels import _pykernels
from edgecache.rng import SplitMix64

try:
    from edgecache.kernels import _distkernels
except ImportError:
    _distkernels = None

CASES = [
    # (cache entries, vector dim)
    (16, 64),
    (128, 64),
    (1024, 64),
    (128, 8),
    (128, 256),
]


def make_case(n, dim, seed=1):
    rng = SplitMix64(seed)
    query = array("d", [rng.gauss() for _ in range(dim)])
    block = array("d", [rng.gauss() for _ in range(n * dim)])
    out = array("d", [0.0] * n)
    return query, block, out


def time_scan(fn, query, block, n, out, repeats):
    # enough iterations that each sample is ~10ms+ even when compiled
    iters = max(1, 2_000_000 // (n * len(query)))
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(iters):
            fn(query, block, n, out)
        best = min(best, (time.perf_counter() - t0) / iters)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _distkernels is None:
        print("compiled kernels not built; benchmarking the fallback only")
    header = f"{'entries':>8} {'dim':>5} {'metric':>7} {'python':>12} {'cython':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n, dim in CASES:
        query, block, out = make_case(n, dim)
        for metric, py_fn, cy_fn in (
            ("l2", _pykernels.l2_distances, getattr(_distkernels, "l2_distances", None)),
            ("cosine", _pykernels.cosine_distances, getattr(_distkernels, "cosine_distances", None)),
        ):
            t_py = time_scan(py_fn, query, block, n, out, args.repeats)
            if cy_fn is not None:
                t_cy = time_scan(cy_fn, query, block, n, out, args.repeats)
                print(
                    f"{n:>8} {dim:>5} {metric:>7} {t_py * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us "
                    f"{t_py / t_cy:>7.1f}x"
                )
            else:
                print(f"{n:>8} {dim:>5} {metric:>7} {t_py * 1e6:>10.1f}us {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
