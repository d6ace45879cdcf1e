#!/usr/bin/env python3
"""Throughput comparison of the block-OMP decode backends.

Times the numba-compiled kernel against the pure-numpy fallback on the
sweep-sized workload (M=14, K=120, blocks of 3, k=2) across batch sizes.
Compilation happens once up front and is excluded from the timings.

Run:  python benchmarks/bench_bomp.py [--sizes 200 1000 5000]
"""

import argparse
import time

import numpy as np

from blocksense import kernels


def make_instance(rng, m=14, k_cols=120, s=3):
    e = rng.standard_normal((m, k_cols))
    e /= np.linalg.norm(e, axis=0)
    offsets = np.arange(0, k_cols + 1, s, dtype=np.int64)
    return e, offsets


def time_backend(fn, e, offsets, y, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(e, offsets, y, 2, 1e-10)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[200, 1000, 5000])
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    e, offsets = make_instance(rng)

    if not kernels.HAVE_NUMBA:
        print("numba backend unavailable (missing or disabled via BLOCKSENSE_NO_NUMBA);")
        print("timing the numpy fallback only.")
    else:
        kernels._bomp_batch_jit(e, offsets, rng.standard_normal((14, 2)), 2, 1e-10)

    header = f"{'batch':>8} {'numpy [s]':>12}"
    if kernels.HAVE_NUMBA:
        header += f" {'numba [s]':>12} {'speedup':>9}"
    print(header)

    for size in args.sizes:
        y = rng.standard_normal((14, size))
        t_numpy = time_backend(kernels._bomp_batch_numpy, e, offsets, y)
        line = f"{size:>8} {t_numpy:>12.4f}"
        if kernels.HAVE_NUMBA:
            t_numba = time_backend(kernels._bomp_batch_jit, e, offsets, y)
            line += f" {t_numba:>12.4f} {t_numpy / t_numba:>8.1f}x"
        print(line)

    if kernels.HAVE_NUMBA:
        theta_a, sup_a, _ = kernels._bomp_batch_numpy(e, offsets, y, 2, 1e-10)
        theta_b, sup_b, _ = kernels._bomp_batch_jit(e, offsets, y, 2, 1e-10)
        agree = np.array_equal(sup_a, sup_b) and np.allclose(theta_a, theta_b, atol=1e-12)
        print(f"\nbackends agree on the last batch: {agree}")


if __name__ == "__main__":
    main()
