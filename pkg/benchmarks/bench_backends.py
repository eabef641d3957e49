#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot kernels (analytic trace accumulation and modulated
Monte-Carlo accumulation) on the published-preset workload, plus the
end-to-end trace and photocurrent synthesis under each backend.

Usage: python3 benchmarks/bench_backends.py [--duration 0.1] [--repeats 3]
"""

import argparse
import math
import time

import numpy as np

from combnoise import _kernels
from combnoise.stochastic import (TraceConfig, sample_photocurrent, si_cyclo_preset,
                                  variance_trace)


def time_call(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n_samples, n_lines, repeats):
    t = np.arange(n_samples) / 1e6
    xc = np.random.default_rng(0).standard_normal(n_samples)
    xs = np.random.default_rng(1).standard_normal(n_samples)
    rows = []
    for name in ("numpy", "numba"):
        try:
            impl = _kernels.get_backend(name)
        except ImportError:
            print(f"{name}: not available, skipping")
            continue

        def run_trace():
            out = np.zeros(n_samples)
            for k in range(n_lines):
                impl["trace_accum"](out, t, 2e4 + 100.0 * k, 1.0, 0.3, -0.2)

        def run_beat():
            out = np.zeros(n_samples)
            for k in range(n_lines):
                impl["beat_accum"](out, t, 1e4 + 100.0 * k, 0.1, 0.7, xc, -0.7, xs)

        run_trace()  # JIT warmup / first-touch
        run_beat()
        rows.append((name, time_call(run_trace, repeats), time_call(run_beat, repeats)))
    return rows


def bench_end_to_end(duration, repeats):
    rows = []
    pre = si_cyclo_preset(duration_s=duration, rbw_hz=max(100.0, 2.0 / duration))
    spec = pre.specs[10.0]
    cfg = TraceConfig(sample_rate_hz=1e6, duration_s=duration, seed=1,
                      rbw_hz=max(100.0, 2.0 / duration))
    times = cfg.times()
    saved = {k: getattr(_kernels, k) for k in ("trace_accum", "beat_accum",
                                               "const_accum")}
    try:
        for name in ("numpy", "numba"):
            try:
                impl = _kernels.get_backend(name)
            except ImportError:
                continue
            for k, fn in impl.items():
                setattr(_kernels, k, fn)

            def run_trace():
                variance_trace(pre.setup, spec, pre.sample, times, lo_spec=None)

            def run_mc():
                sample_photocurrent(pre.setup, spec, pre.sample, cfg, lo_spec=None)

            run_trace()
            run_mc()
            rows.append((name, time_call(run_trace, repeats), time_call(run_mc, repeats)))
    finally:
        for k, fn in saved.items():
            setattr(_kernels, k, fn)
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--duration", type=float, default=0.1,
                        help="simulated seconds for the end-to-end runs")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    n_samples = int(1e6 * args.duration)
    print(f"active backend: {_kernels.BACKEND}")
    print(f"\nkernel microbenchmarks ({n_samples} samples x 101 lines, "
          f"best of {args.repeats}):")
    print(f"{'backend':>8} {'trace_accum':>14} {'beat_accum':>14}")
    for name, t_tr, t_bt in bench_kernels(n_samples, 101, args.repeats):
        print(f"{name:>8} {t_tr:>13.4f}s {t_bt:>13.4f}s")

    print(f"\nend-to-end preset workload ({args.duration:g} s at 1 MHz, 101 lines):")
    print(f"{'backend':>8} {'variance_trace':>15} {'sample_photocurrent':>20}")
    rows = bench_end_to_end(args.duration, args.repeats)
    for name, t_tr, t_mc in rows:
        print(f"{name:>8} {t_tr:>14.4f}s {t_mc:>19.4f}s")
    if len(rows) == 2:
        print(f"\nspeedup (numpy/numba): trace x{rows[0][1] / rows[1][1]:.2f}, "
              f"monte-carlo x{rows[0][2] / rows[1][2]:.2f}")


if __name__ == "__main__":
    main()
