"""Pure numpy implementations of the hot kernels.

Used whenever the compiled extension is unavailable (or disabled through
SPEECHMIX_PURE=1). The activity counter is written so its integer counts are
identical to the compiled loop; the convolution is a strided-view einsum.
"""

import numpy as np


def p56_activity_counts(envelope, thresholds, hangover):
    """Per-threshold active-sample counts with hangover continuation.

    Equivalent to the sequential loop: a sample is active at threshold j if
    envelope >= threshold, or if the most recent such sample lies at most
    `hangover` positions back. Samples before the first crossing never count.
    """
    n = envelope.shape[0]
    idx = np.arange(n, dtype=np.int64)
    counts = np.empty(thresholds.shape[0], dtype=np.int64)
    for j, thr in enumerate(thresholds):
        above = envelope >= thr
        # index of the most recent above-threshold sample at each position
        last = np.where(above, idx, np.int64(-n - 1))
        np.maximum.accumulate(last, out=last)
        gap = idx - last
        counts[j] = int(np.count_nonzero(above | (gap <= hangover)))
    return counts


def conv1d(x, weight, bias, stride):
    """Valid strided 1-D convolution via a sliding-window view.

    x: (in_channels, t_in), weight: (out_channels, in_channels, kernel).
    """
    kernel = weight.shape[2]
    windows = np.lib.stride_tricks.sliding_window_view(x, kernel, axis=1)
    windows = windows[:, ::stride, :]  # (c_in, t_out, kernel)
    out = np.einsum("ock,ctk->ot", weight, windows, optimize=True)
    if bias is not None:
        out = out + bias[:, None]
    return np.ascontiguousarray(out)
