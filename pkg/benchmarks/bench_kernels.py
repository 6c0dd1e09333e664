#!/usr/bin/env python3
"""Micro- and macro-benchmarks of the compiled kernels vs the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 64 256 1024] [--repeat 2000]
"""

import argparse
import time

import numpy as np

import snls._kernels as K
from snls._kernels import BACKENDS


def time_call(fn, args, repeat):
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def micro(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'size':>7}" + "".join(f"{name:>14}" for name in BACKENDS) + f"{'speedup':>10}")
    for size in sizes:
        u = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        w = rng.standard_normal(size)
        cases = {
            "cmul": (u, v),
            "cmul_real": (u, w),
            "caxpy": (0.3 - 0.7j, u, v),
            "nonlinear_phase": (u, 2.0, -0.37),
            "abs2_wsum": (u, w),
            "abs_pow_sum": (u, 4.0),
            "diff_norm2": (u, v),
        }
        for name, args in cases.items():
            times = {b: time_call(getattr(mod, name), args, repeat) for b, mod in BACKENDS.items()}
            row = f"{name:<18}{size:>7}"
            for b in BACKENDS:
                row += f"{times[b] * 1e6:>12.2f}us"
            if "cython" in times:
                row += f"{times['python'] / times['cython']:>9.2f}x"
            print(row)
        print()


def macro(repeat):
    """One full splitting step (linear half / nonlinear / Cayley / half) per backend."""
    from snls import (Field, Grid, IncrementStream, NoiseModel, PowerNonlinearity,
                      StepperConfig, TruncationLevel, run_path)

    grid = Grid(1, 256, 2 * np.pi)
    rng = np.random.default_rng(1)
    coeffs = np.zeros(grid.shape, dtype=complex)
    for k in range(-6, 7):
        coeffs[k] = 0.3 * (rng.standard_normal() + 1j * rng.standard_normal())
    u0 = Field.spectral(grid, coeffs)
    model = NoiseModel(grid, [0.25 * np.cos((m + 1) * grid.axis_coordinates) for m in range(3)])
    nl = PowerNonlinearity(3.0, +1, 1)
    steps = max(50, repeat // 10)
    cfg = StepperConfig("splitting", 1e-3, steps * 1e-3, TruncationLevel(8))

    names = [n for n in ("cmul", "cmul_real", "caxpy", "nonlinear_phase",
                         "abs2_wsum", "abs2_sum", "abs_pow_sum", "linf", "diff_norm2")]
    saved = {n: getattr(K, n) for n in names}
    print(f"macro: {steps} splitting steps, N=256, 3 noise modes")
    for backend, mod in BACKENDS.items():
        for n in names:
            setattr(K, n, getattr(mod, n))
        stream = IncrementStream(3, 0, cfg.dt, cfg.steps, 3)
        t0 = time.perf_counter()
        run_path(u0, cfg, model, nl, stream, sample_every=cfg.steps)
        elapsed = time.perf_counter() - t0
        print(f"  {backend:<8} {elapsed / steps * 1e6:10.1f} us/step   ({elapsed:.3f}s total)")
    for n, fn in saved.items():
        setattr(K, n, fn)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    if "cython" not in BACKENDS:
        print("note: compiled kernels unavailable; timing the fallback only")
    micro(args.sizes, args.repeat)
    macro(args.repeat)


if __name__ == "__main__":
    main()
