"""Compare the compiled and numpy split-search kernels.

Usage: python benchmarks/bench_kernels.py [n_rows]
"""
import sys
import time

import numpy as np

from delaycast import _kernels_py, kernels


def bench(fn, *args, repeats=50):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.normal(size=n))
    y = rng.integers(0, 2, size=n).astype(np.float64)
    g = rng.normal(size=n)
    h = rng.uniform(0.01, 0.25, size=n)

    if kernels.BACKEND != "cython":
        print("compiled extension not available; nothing to compare")
        return

    print(f"n = {n} rows, best of 50 runs")
    for name, compiled, fallback, args in [
        ("gini split scan", kernels.best_split_gini, _kernels_py.best_split_gini,
         (x, y, 1.0)),
        ("grad/hess split scan", kernels.best_split_grad_hess,
         _kernels_py.best_split_grad_hess, (x, g, h, 1.0, 1.0)),
    ]:
        t_cy = bench(compiled, *args)
        t_py = bench(fallback, *args)
        assert compiled(*args)[0] == fallback(*args)[0]
        print(f"{name:22s} cython {t_cy * 1e3:8.3f} ms   "
              f"numpy {t_py * 1e3:8.3f} ms   speedup {t_py / t_cy:5.2f}x")


if __name__ == "__main__":
    main()
