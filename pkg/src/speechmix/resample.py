"""Polyphase windowed-sinc resampler.

Band-limited rate conversion by an integer ratio U/D (the rates reduced by
their gcd): conceptually zero-stuff by U, low-pass filter with a Kaiser
windowed sinc, then keep every D-th sample. The filter is evaluated in
polyphase form so only the surviving outputs are computed.

Prototype filter: 64 taps per phase (total length 64*U + 1 so the group
delay is an integer number of upsampled samples), Kaiser beta 8.6, cutoff
at 0.9 x min(input Nyquist, output Nyquist), passband gain U.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .audio import AudioBuffer

TAPS_PER_PHASE = 64
KAISER_BETA = 8.6
CUTOFF_SCALE = 0.9


@lru_cache(maxsize=32)
def _polyphase_bank(up: int, down: int):
    """Phase filters for a U/D converter: list of (taps, first_input_offset)."""
    n_taps = TAPS_PER_PHASE * up + 1
    center = TAPS_PER_PHASE * up // 2
    # cutoff in cycles per upsampled sample
    fc = 0.5 * CUTOFF_SCALE * min(1.0, up / down) / up
    n = np.arange(n_taps, dtype=np.float64)
    proto = 2.0 * fc * np.sinc(2.0 * fc * (n - center)) * np.kaiser(n_taps, KAISER_BETA)
    proto *= up
    phases = []
    for p in range(up):
        phases.append(np.ascontiguousarray(proto[p::up][::-1]))
    return phases, center


def output_length(n_in: int, source_rate: int, target_rate: int) -> int:
    """round(n_in * target_rate / source_rate), computed exactly in integers."""
    return (2 * n_in * target_rate + source_rate) // (2 * source_rate)


def resample(buffer: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Resample to target_rate; identical buffer when the rate already matches."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    src = buffer.sample_rate
    if target_rate == src:
        return buffer
    g = math.gcd(src, target_rate)
    up, down = target_rate // g, src // g
    n_out = output_length(len(buffer), src, target_rate)

    phases, center = _polyphase_bank(up, down)
    x = buffer.samples
    # output n taps the upsampled stream at i = n*down + center; expressing
    # i = m*up + p, the contribution is sum_q h[p + q*up] * x[m - q]
    pad = TAPS_PER_PHASE + 1
    xp = np.concatenate([np.zeros(pad), x, np.zeros(pad + TAPS_PER_PHASE)])
    out = np.empty(n_out)
    n_all = np.arange(n_out, dtype=np.int64)
    i_all = n_all * down + center
    m_all = i_all // up
    p_all = i_all - m_all * up
    for p in range(up):
        sel = np.nonzero(p_all == p)[0]
        if sel.size == 0:
            continue
        taps = phases[p]
        k = taps.shape[0]
        # window of inputs x[m-k+1 .. m], in natural order, against reversed taps
        starts = m_all[sel] - (k - 1) + pad
        windows = np.lib.stride_tricks.sliding_window_view(xp, k)[starts]
        out[sel] = windows @ taps
    return AudioBuffer(out, target_rate)
