"""Benchmark the RK4 monodromy kernel: numba backend against pure numpy.

Usage::

    python benchmarks/bench_rk4.py [--e 0.5] [--steps N] [--repeat 5]

Both backends integrate the same system; the script reports the best wall
time per period map and the largest entry-wise difference of the results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from erestab import _kernels
from erestab.monodromy import default_steps
from erestab.reduction import ReducedParams, build_B


def best_time(func, repeat: int) -> tuple[float, np.ndarray]:
    best, result = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        result = func()
        best = min(best, time.perf_counter() - start)
    return best, result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--alpha", type=float, default=2.9)
    parser.add_argument("--e", type=float, default=0.5)
    parser.add_argument("--steps", type=int, default=None)
    parser.add_argument("--stride", type=int, default=32)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    steps = args.steps or default_steps(args.e)
    pieces = build_B(ReducedParams.from_alpha(args.alpha, args.e)).generator_pieces()

    def run_numpy():
        return _kernels.rk4_path_numpy(*pieces, args.e, steps, args.stride)[0]

    print(f"alpha={args.alpha} e={args.e} steps={steps}")
    t_np, X_np = best_time(run_numpy, max(1, args.repeat // 2))
    print(f"numpy : {t_np * 1e3:9.2f} ms")
    if not _kernels.HAVE_NUMBA:
        print("numba : not installed")
        return 0

    previous = _kernels.set_backend("numba")
    try:
        def run_numba():
            return _kernels.rk4_path(*pieces, args.e, steps, args.stride)[0]

        start = time.perf_counter()
        run_numba()
        print(f"numba : first call (compile or cache load) {time.perf_counter() - start:.2f} s")
        t_nb, X_nb = best_time(run_numba, args.repeat)
    finally:
        _kernels.set_backend(previous)
    print(f"numba : {t_nb * 1e3:9.2f} ms")
    print(f"speed-up {t_np / t_nb:.1f}x, max |difference| {np.max(np.abs(X_np - X_nb)):.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
