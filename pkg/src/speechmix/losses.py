"""Reference/degraded distances: feature MSE, spectral MSE and SI-SDR."""

from __future__ import annotations

import math

import numpy as np

from .audio import AudioBuffer
from .stft import KIND_ENCODER, KIND_STFT_MAGNITUDE, FeatureMap, stft_magnitude


def loss_fe(ref: FeatureMap, deg: FeatureMap) -> float:
    """Mean squared difference over a T x F feature pair."""
    if ref.kind != deg.kind or ref.kind not in (KIND_ENCODER, KIND_STFT_MAGNITUDE):
        raise ValueError(f"incompatible feature kinds {ref.kind!r} vs {deg.kind!r}")
    if ref.shape != deg.shape:
        raise ValueError(f"shape mismatch {ref.shape} vs {deg.shape}")
    diff = ref.values - deg.values
    return float(np.mean(diff * diff))


def loss_spec_mse(ref: AudioBuffer, deg: AudioBuffer, **stft_kwargs) -> float:
    """Feature MSE over the two magnitude spectrograms."""
    if len(ref) != len(deg):
        raise ValueError(f"length mismatch: {len(ref)} vs {len(deg)} samples")
    if ref.sample_rate != deg.sample_rate:
        raise ValueError(
            f"sample rates differ: {ref.sample_rate} vs {deg.sample_rate}")
    return loss_fe(stft_magnitude(ref, **stft_kwargs), stft_magnitude(deg, **stft_kwargs))


def si_sdr(ref: AudioBuffer, est: AudioBuffer) -> float:
    """Scale-invariant signal-to-distortion ratio in dB.

    Projects the estimate onto the reference; returns math.inf when the
    estimate is an exact rescaling of the reference.
    """
    if len(ref) != len(est):
        raise ValueError(f"length mismatch: {len(ref)} vs {len(est)} samples")
    r = ref.samples
    e = est.samples
    ref_energy = float(np.dot(r, r))
    if ref_energy == 0.0:
        raise ValueError("reference signal is all zeros")
    alpha = float(np.dot(e, r)) / ref_energy
    target = alpha * r
    distortion = target - e
    num = float(np.dot(target, target))
    den = float(np.dot(distortion, distortion))
    if den == 0.0:
        return math.inf
    if num == 0.0:
        return -math.inf
    return 10.0 * math.log10(num / den)
