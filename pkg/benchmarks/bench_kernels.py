#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Times the two hot paths: the coefficient sweep (one pass of the basis
recurrence over the sample with per-degree reductions) and series
evaluation on a grid.  Run directly:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from legadapt import _kernels_py

try:
    from legadapt import _kernels
except ImportError:
    _kernels = None


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    cases = [(512, 340), (2048, 1364), (8192, 5460)]
    impls = [("pure", _kernels_py)]
    if _kernels is not None:
        impls.append(("compiled", _kernels))

    print(f"{'case':<28}" + "".join(f"{name:>12}" for name, _ in impls) + "   speedup")
    for n, k_max in cases:
        xs = rng.uniform(-1, 1, n)
        w = rng.normal(size=n)
        times = [_time(mod.coeff_sums, xs, w, k_max) for _, mod in impls]
        ratio = times[0] / times[-1] if len(times) > 1 else float("nan")
        label = f"coeff_sums n={n} k={k_max}"
        print(f"{label:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
              + f"   {ratio:5.2f}x")
    for n_pts, n_coef in [(101, 600), (8192, 600), (10000, 2000)]:
        xs = rng.uniform(-1, 1, n_pts)
        coeffs = rng.normal(size=n_coef)
        times = [_time(mod.eval_series, coeffs, xs) for _, mod in impls]
        ratio = times[0] / times[-1] if len(times) > 1 else float("nan")
        label = f"eval_series p={n_pts} j={n_coef}"
        print(f"{label:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
              + f"   {ratio:5.2f}x")


if __name__ == "__main__":
    main()
