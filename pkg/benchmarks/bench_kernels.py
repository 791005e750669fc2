#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Run after an in-place build:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from speechmix.kernels import _pyref

try:
    from speechmix.kernels import _native
except ImportError:
    _native = None


def bench(label, fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    print(f"  {label:<24} {best * 1e3:9.2f} ms")
    return best


def sequential_counts(envelope, thresholds, hangover):
    """The unaccelerated per-sample loop, for scale."""
    counts = [0] * len(thresholds)
    hang = [hangover] * len(thresholds)
    for q in envelope:
        for j, thr in enumerate(thresholds):
            if q >= thr:
                counts[j] += 1
                hang[j] = 0
            elif hang[j] < hangover:
                counts[j] += 1
                hang[j] += 1
            else:
                break
    return counts


def main():
    rng = np.random.default_rng(0)

    print("p56 activity counting (10 s of 16 kHz envelope, 15 thresholds):")
    env = np.abs(rng.normal(0, 0.3, 160000))
    thresholds = env.max() * np.exp2(np.arange(-15.0, 0.0))
    hangover = 3200
    bench("python loop", lambda: sequential_counts(env, thresholds, hangover))
    py = bench("numpy fallback", lambda: _pyref.p56_activity_counts(env, thresholds, hangover))
    if _native is not None:
        nat = bench("compiled", lambda: _native.p56_activity_counts(env, thresholds, hangover))
        print(f"  compiled speedup over fallback: {py / nat:.1f}x")

    print("conv1d forward (512x512 kernel 3 stride 2 over 1599 frames):")
    x = rng.normal(size=(512, 1599))
    w = rng.normal(size=(512, 512, 3))
    py = bench("numpy fallback", lambda: _pyref.conv1d(x, w, None, 2), repeats=3)
    if _native is not None:
        nat = bench("compiled", lambda: _native.conv1d(x, w, None, 2), repeats=3)
        faster, slower = ("compiled", "fallback") if nat < py else ("fallback", "compiled")
        ratio = max(py, nat) / min(py, nat)
        print(f"  {faster} is {ratio:.1f}x faster than the {slower} here")

    print("conv1d forward (first layer: 1->64, kernel 10, stride 5, 1 s audio):")
    x = rng.normal(size=(1, 16000))
    w = rng.normal(size=(64, 1, 10))
    py = bench("numpy fallback", lambda: _pyref.conv1d(x, w, None, 5))
    if _native is not None:
        bench("compiled", lambda: _native.conv1d(x, w, None, 5))

    if _native is None:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
