# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: activity counting for the active-level meter and the
1-D convolution forward pass. Semantics mirror kernels._pyref exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def p56_activity_counts(const double[::1] envelope, const double[::1] thresholds,
                        long hangover):
    """Per-threshold active-sample counts with hangover continuation.

    A sample counts as active at threshold j when the envelope is at or above
    the threshold, or when fewer than `hangover` samples have passed since it
    last was. Leading samples before the first crossing never count.
    """
    cdef Py_ssize_t n = envelope.shape[0]
    cdef Py_ssize_t m = thresholds.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hang = np.full(m, hangover, dtype=np.int64)
    cdef long long[::1] cv = counts
    cdef long long[::1] hv = hang
    cdef Py_ssize_t i, j
    cdef double q

    for i in range(n):
        q = envelope[i]
        for j in range(m):
            if q >= thresholds[j]:
                cv[j] += 1
                hv[j] = 0
            elif hv[j] < hangover:
                cv[j] += 1
                hv[j] += 1
            else:
                # thresholds ascend, so every later one is also exhausted
                break
    return counts


def conv1d(const double[:, ::1] x, const double[:, :, ::1] weight, bias, long stride):
    """Valid (no padding) strided 1-D convolution.

    x: (in_channels, t_in), weight: (out_channels, in_channels, kernel),
    bias: (out_channels,) float64 array or None. Returns (out_channels, t_out).
    """
    cdef Py_ssize_t c_in = x.shape[0]
    cdef Py_ssize_t t_in = x.shape[1]
    cdef Py_ssize_t c_out = weight.shape[0]
    cdef Py_ssize_t kernel = weight.shape[2]
    cdef Py_ssize_t t_out = (t_in - kernel) // stride + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((c_out, t_out))
    cdef double[:, ::1] ov = out
    cdef const double[::1] bv
    cdef Py_ssize_t o, t, c, k, base
    cdef double acc

    for o in range(c_out):
        for t in range(t_out):
            base = t * stride
            acc = 0.0
            for c in range(c_in):
                for k in range(kernel):
                    acc += weight[o, c, k] * x[c, base + k]
            ov[o, t] = acc
    if bias is not None:
        bv = bias
        for o in range(c_out):
            for t in range(t_out):
                ov[o, t] += bv[o]
    return out
