"""Active speech level (ITU-T P.56 method B) and plain mean power.

Method B in brief: rectify the waveform, smooth it twice with a one-pole
exponential (time constant 0.03 s) to get an envelope, count how many
samples stay active at a ladder of candidate thresholds (each half the
previous, with a 0.2 s hangover), and pick the level where the gap between
the long-term level and the threshold crosses a 15.9 dB margin, refining by
bisection between neighbouring thresholds.

One deliberate departure from the letter of the standard: the threshold
ladder is anchored at the envelope peak rather than at absolute 16-bit
quantizer levels. Downstream code only ever consumes power ratios, and the
relative ladder makes the meter exactly gain-invariant: scaling the input
by g scales both powers by g^2 and leaves the activity factor untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from . import kernels
from .audio import AudioBuffer
from .errors import NoActiveSpeechError

SMOOTHING_TIME_S = 0.03
HANGOVER_S = 0.2
MARGIN_DB = 15.9
N_THRESHOLDS = 15
INTERP_TOL_DB = 0.5
MIN_SAMPLE_RATE = 8000


@dataclass(frozen=True)
class ActiveLevelReport:
    """Mean-square powers from the active-level meter (linear, not dB)."""

    active_power: float
    activity_factor: float
    long_term_power: float


def mean_power(buffer: AudioBuffer) -> float:
    """Plain mean-square power (1/N) sum x^2."""
    if len(buffer) < 1:
        raise ValueError("mean_power needs at least one sample")
    x = buffer.samples
    return float(np.dot(x, x) / len(x))


def envelope(buffer: AudioBuffer) -> np.ndarray:
    """Two cascaded one-pole smoothers over |x| (the method B detector)."""
    g = math.exp(-1.0 / (buffer.sample_rate * SMOOTHING_TIME_S))
    b, a = [1.0 - g], [1.0, -g]
    p = lfilter(b, a, np.abs(buffer.samples))
    return lfilter(b, a, p)


def active_level_p56(buffer: AudioBuffer) -> ActiveLevelReport:
    """Active speech power, activity factor and long-term power of a buffer.

    Raises NoActiveSpeechError for silence or signals with no measurable
    activity (so callers never divide by a zero speech power).
    """
    if buffer.sample_rate < MIN_SAMPLE_RATE:
        raise ValueError(
            f"sample_rate {buffer.sample_rate} below supported minimum {MIN_SAMPLE_RATE}")
    min_len = math.ceil(buffer.sample_rate * SMOOTHING_TIME_S)
    if len(buffer) < min_len:
        raise ValueError(
            f"buffer too short for the envelope smoother ({len(buffer)} < {min_len} samples)")

    x = buffer.samples
    sq = float(np.dot(x, x))
    n = len(x)
    long_term = sq / n
    q = envelope(buffer)
    q_max = float(q.max())
    if q_max <= 0.0:
        raise NoActiveSpeechError("all-zero signal")

    # half-level ladder anchored at the envelope peak, ascending
    exponents = np.arange(1 - N_THRESHOLDS - 1, 0)  # -15 .. -1
    thresholds = q_max * np.exp2(exponents.astype(np.float64))
    hangover = math.ceil(buffer.sample_rate * HANGOVER_S)
    counts = kernels.p56_activity_counts(np.ascontiguousarray(q), thresholds, hangover)

    a_db = np.full(N_THRESHOLDS, -np.inf)
    nz = counts > 0
    a_db[nz] = 10.0 * np.log10(sq / counts[nz])
    c_db = 20.0 * np.log10(thresholds)
    delta = a_db - c_db

    crossing = None
    for j in range(N_THRESHOLDS):
        if counts[j] > 0 and delta[j] <= MARGIN_DB:
            crossing = j
            break
    if crossing is None:
        raise NoActiveSpeechError("margin never crossed: no speech-like activity")
    if crossing == 0:
        # even the lowest threshold sits within the margin; the signal is a
        # lone click or otherwise has no sustained activity to measure
        raise NoActiveSpeechError("no sustained activity above the envelope floor")

    asl_db, _thr_db = _margin_bisect(
        float(a_db[crossing]), float(a_db[crossing - 1]),
        float(c_db[crossing]), float(c_db[crossing - 1]))
    active_power = 10.0 ** (asl_db / 10.0)
    activity = long_term / active_power
    return ActiveLevelReport(active_power, activity, long_term)


def _margin_bisect(upcount, lwcount, upthr, lwthr, margin=MARGIN_DB, tol=INTERP_TOL_DB):
    """Bisect along the (level, threshold) segment until level-thr-margin ~ 0."""
    if abs(upcount - upthr - margin) < tol:
        return upcount, upthr
    if abs(lwcount - lwthr - margin) < tol:
        return lwcount, lwthr
    midcount = (upcount + lwcount) / 2.0
    midthr = (upthr + lwthr) / 2.0
    iterations = 0
    while True:
        diff = midcount - midthr - margin
        if abs(diff) <= tol:
            return midcount, midthr
        iterations += 1
        if iterations > 20:
            tol *= 1.1
        if diff > tol:
            midcount = (upcount + midcount) / 2.0
            midthr = (upthr + midthr) / 2.0
        else:
            midcount = (midcount + lwcount) / 2.0
            midthr = (midthr + lwthr) / 2.0
