"""Kernel backend selection.

The compiled Cython extension is preferred for the activity-counting loop
when importable; setting SPEECHMIX_PURE=1 forces the numpy fallback.
`backend()` reports which one is live.

The convolution goes through the numpy implementation on both backends:
its sliding-window einsum lowers to BLAS and measures an order of
magnitude faster than a scalar compiled loop at production channel counts
(see benchmarks/bench_kernels.py). The compiled conv1d stays available for
parity tests and the benchmark.
"""

import os

from . import _pyref

BACKEND = "python"
_counts_impl = _pyref

if os.environ.get("SPEECHMIX_PURE") != "1":
    try:
        from . import _native

        _counts_impl = _native
        BACKEND = "native"
    except ImportError:
        pass


def backend() -> str:
    return BACKEND


def p56_activity_counts(envelope, thresholds, hangover):
    return _counts_impl.p56_activity_counts(envelope, thresholds, hangover)


def conv1d(x, weight, bias, stride):
    return _pyref.conv1d(x, weight, bias, stride)
