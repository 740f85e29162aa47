"""Throughput comparison: numba-compiled kernels vs the pure-numpy fallback.

Run from the repository root:

    python benchmarks/bench_kernels.py [--steps 200000]

The same benchmark on the pure path alone:

    KOVTOP_NUMBA=0 python benchmarks/bench_kernels.py
"""
import argparse
import time

import numpy as np

from kovtop import kernels
from kovtop._jit import JIT_ENABLED


def time_fn(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_orbit(steps):
    rows = []
    cases = [
        ("euler-hk orbit N=3", kernels.EULER_HK, np.array([0.3, 0.4, 0.5])),
        ("gen-hk orbit N=4", kernels.GEN_HK, np.array([0.2, 0.3, 0.4, 0.5])),
        ("alt-map orbit N=6", kernels.ALT,
         np.array([0.2, 0.3, 0.4, 0.5, 0.6, 0.7])),
    ]
    for label, code, y0 in cases:
        args = (code, y0, 0.001, steps, 0.0, np.inf, 0.0, False, 1e12)
        if JIT_ENABLED:
            kernels.map_orbit(*args)  # compile outside the timing
            t_jit = time_fn(kernels.map_orbit, *args)
        else:
            t_jit = None
        t_py = time_fn(kernels.py_map_orbit, *args)
        rows.append((label, steps, t_jit, t_py))
    return rows


def bench_rk4(steps):
    sc = np.zeros(4)
    sc[0] = 1.0
    dummy = np.zeros((1, 1, 1))
    y0 = np.array([0.1, 0.15, 0.2, 0.25])
    args = (kernels.FLOW_SCALED_QUAD, y0, 2.0, sc, dummy, 1e-5, steps, 1e12)
    if JIT_ENABLED:
        kernels.rk4_orbit(*args)
        t_jit = time_fn(kernels.rk4_orbit, *args)
    else:
        t_jit = None
    t_py = time_fn(kernels.py_rk4_orbit, *args)
    return [("rk4 trajectory N=4", steps, t_jit, t_py)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    args = ap.parse_args()

    print(f"jit path enabled: {JIT_ENABLED}")
    print(f"{'kernel':24s} {'steps':>9s} {'numba':>15s} {'numpy':>13s} {'speedup':>9s}")
    for label, steps, t_jit, t_py in bench_orbit(args.steps) + bench_rk4(args.steps // 10):
        jit_txt = "-" if t_jit is None else f"{steps / t_jit:,.0f}/s"
        py_txt = f"{steps / t_py:,.0f}/s"
        ratio = "-" if t_jit is None else f"{t_py / t_jit:.1f}x"
        print(f"{label:24s} {steps:>9d} {jit_txt:>15s} {py_txt:>13s} {ratio:>9s}")


if __name__ == "__main__":
    main()
