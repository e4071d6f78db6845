"""Benchmark the numba kernels against their pure-numpy fallbacks.

Runs both implementations of each hot kernel on region-build-sized
inputs, checks they agree, and reports timings.  The same comparison at
package level: one full region build per backend.

Usage: python benchmarks/bench_kernels.py [--n 200000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from linfbcap import _kernels
from linfbcap.siso import mac_siso_region


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernel(name, fn_numba, fn_numpy, check, repeat):
    fn_numba()  # JIT warmup
    t_nb = _time(fn_numba, repeat)
    t_np = _time(fn_numpy, repeat)
    agree = check()
    print(f"{name:24s} numba {t_nb * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms"
          f"   speedup {t_np / t_nb:6.2f}x   max|diff| {agree:.2e}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    n = args.n
    a = rng.uniform(0.0, 20.0, n)
    b = rng.uniform(0.0, 20.0, n)
    rho = rng.uniform(0.0, 1.0, n)
    s = a + b + 2.0 * np.sqrt(a * b) * rho
    pts = rng.uniform(0.0, 3.0, (n, 2))

    bench_kernel(
        "rho_star_grid",
        lambda: _kernels.rho_star_grid_numba(a, b),
        lambda: _kernels.rho_star_grid_numpy(a, b),
        lambda: float(np.max(np.abs(
            _kernels.rho_star_grid_numba(a, b)
            - _kernels.rho_star_grid_numpy(a, b)))),
        args.repeat,
    )
    bench_kernel(
        "pentagon_corners",
        lambda: _kernels.pentagon_corners_numba(a, b, s),
        lambda: _kernels.pentagon_corners_numpy(a, b, s),
        lambda: float(np.max(np.abs(
            _kernels.pentagon_corners_numba(a, b, s)
            - _kernels.pentagon_corners_numpy(a, b, s)))),
        args.repeat,
    )

    def pareto_diff():
        fa = _kernels.pareto_filter_numba(pts)
        fb = _kernels.pareto_filter_numpy(pts)
        if fa.shape != fb.shape:
            return float("inf")
        return float(np.max(np.abs(fa - fb)))

    bench_kernel(
        "pareto_filter",
        lambda: _kernels.pareto_filter_numba(pts),
        lambda: _kernels.pareto_filter_numpy(pts),
        pareto_diff,
        args.repeat,
    )

    for backend, flag in (("numba", True), ("numpy", False)):
        _kernels.USE_NUMBA = flag and _kernels.HAS_NUMBA
        mac_siso_region(1.0, 1.0, 10.0)  # warm
        t = _time(lambda: mac_siso_region(1.0, 1.0, 10.0), args.repeat)
        print(f"mac_siso_region[{backend}]  {t * 1e3:9.2f} ms")
    _kernels.USE_NUMBA = _kernels.HAS_NUMBA and not _kernels.PURE_NUMPY


if __name__ == "__main__":
    main()
