#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Covers the two hot loops: the ARMA innovations filter (the inner loop of
every likelihood evaluation during ARIMAX fitting) and the fixed-timestep
frame integrator (trajectory generation and server-side replay validation).
Also asserts the two backends agree bit for bit on the benchmark inputs.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from gridtrust._kernels import _pykernels

try:
    from gridtrust._kernels import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_filter(repeat):
    rng = np.random.default_rng(1)
    y = rng.standard_normal((2000, 4))
    phi = np.array([0.5, -0.2])
    theta = np.array([0.3, 0.25, -0.1])
    cases = []
    t_py, (v_py, f_py) = _time(lambda: _pykernels.arma_innovations(y, phi, theta), repeat)
    cases.append(("python", t_py))
    if _ckernels is not None:
        t_c, (v_c, f_c) = _time(lambda: _ckernels.arma_innovations(y, phi, theta), repeat)
        assert np.array_equal(v_py, v_c) and np.array_equal(f_py, f_c), "backend mismatch"
        cases.append(("cython", t_c))
    return "arma_innovations n=2000 c=4 (p=2,q=3)", cases


def bench_integrator(repeat):
    rng = np.random.default_rng(2)
    n = 600 * 72  # one full session's ticks
    fx = rng.uniform(-600, 600, n)
    fy = rng.uniform(-600, 600, n)
    inx = (rng.random(n) < 0.8).astype(np.uint8)
    iny = (rng.random(n) < 0.8).astype(np.uint8)
    args = (350.0, 350.0, 0.0, 0.0, fx, fy, inx, iny, 0.85, 192.0, 1.0 / 30.0, 700.0)
    cases = []
    t_py, (p_py, v_py) = _time(lambda: _pykernels.integrate_axes(*args), repeat)
    cases.append(("python", t_py))
    if _ckernels is not None:
        t_c, (p_c, v_c) = _time(lambda: _ckernels.integrate_axes(*args), repeat)
        assert np.array_equal(p_py, p_c) and np.array_equal(v_py, v_c), "backend mismatch"
        cases.append(("cython", t_c))
    return f"integrate_axes n={n} (one session)", cases


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _ckernels is None:
        print("note: compiled kernels not built; timing the fallback only\n")

    for name, cases in (bench_filter(args.repeat), bench_integrator(args.repeat)):
        print(name)
        base = dict(cases)["python"]
        for backend, t in cases:
            speedup = f"  ({base / t:5.1f}x)" if backend == "cython" else ""
            print(f"  {backend:<8} {t * 1e3:9.3f} ms{speedup}")
        print()
    if _ckernels is not None:
        print("backends agree bit-for-bit on all benchmark inputs")


if __name__ == "__main__":
    main()
