#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--rows N] [--queries N]

Times the two hot paths: the full-scan predicate kernel (as driven by the
selectivity oracle) and KDE mixture sampling. Both implementations produce
identical output; this only measures speed.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from driftgen.kernels import _pykernels

try:
    from driftgen.kernels import _ckernels
except ImportError:
    _ckernels = None


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_scan(impl, rows, queries, rng):
    range_cols = np.ascontiguousarray(rng.normal(50, 15, (2, rows)))
    range_cols[rng.random((2, rows)) < 0.02] = np.nan
    eq_cols = np.ascontiguousarray(rng.integers(0, 8, (1, rows)).astype(np.int64))
    lows = rng.uniform(20, 60, queries)

    def run():
        for lo in lows:
            impl.predicate_count(
                rows,
                range_cols,
                np.array([lo, 10.0]),
                np.array([lo + 10, 90.0]),
                eq_cols,
                np.array([3], dtype=np.int64),
            )

    return time_call(run)


def bench_mixture(impl, rows, rng):
    points = rng.normal(40, 13, 10_000)
    idx = rng.integers(0, len(points), rows).astype(np.int64)
    noise = rng.standard_normal(rows)
    return time_call(lambda: impl.mixture_sample(points, idx, noise, 1.3, 18.0, 90.0))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=100_000)
    parser.add_argument("--queries", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    impls = [("numpy fallback", _pykernels)]
    if _ckernels is not None:
        impls.append(("compiled", _ckernels))
    else:
        print("compiled kernels not built; benchmarking the fallback only")

    print(f"predicate scan: {args.queries} queries x {args.rows} rows (2 range + 1 equality)")
    results = {}
    for name, impl in impls:
        elapsed = bench_scan(impl, args.rows, args.queries, np.random.default_rng(1))
        rate = args.queries * args.rows / elapsed / 1e6
        results[name] = elapsed
        print(f"  {name:16s} {elapsed * 1e3:8.1f} ms   {rate:8.0f} M row-evals/s")
    if len(results) == 2:
        print(f"  speedup: {results['numpy fallback'] / results['compiled']:.2f}x")

    print(f"mixture sampling: {args.rows} draws")
    results = {}
    for name, impl in impls:
        elapsed = bench_mixture(impl, args.rows, np.random.default_rng(2))
        results[name] = elapsed
        print(f"  {name:16s} {elapsed * 1e3:8.2f} ms   {args.rows / elapsed / 1e6:6.0f} M draws/s")
    if len(results) == 2:
        print(f"  speedup: {results['numpy fallback'] / results['compiled']:.2f}x")


if __name__ == "__main__":
    main()
