"""Short-time Fourier analysis and mask-based overlap-add resynthesis.

Framing is plain: no centering or pre-padding, frame t covers samples
[t*hop, t*hop + win), T = 1 + floor((N - win) / hop). The window is a
periodic Hamming, which at 50% overlap sums to exactly 1.08 everywhere two
frames meet; resynthesis divides by the actual per-sample overlapped window
sum, so an all-ones mask reproduces the input on every covered sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer

N_FFT = 512
WIN_S = 0.032
HOP_S = 0.016

KIND_STFT_COMPLEX = "stft_complex"
KIND_STFT_MAGNITUDE = "stft_magnitude"
KIND_ENCODER = "encoder_features"


@dataclass(frozen=True)
class FeatureMap:
    """A T x F matrix with its frame rate and what kind of features it holds."""

    values: np.ndarray = field(repr=False)
    frame_rate: float
    kind: str

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"expected a T x F matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values contain NaN or Inf")
        if self.kind not in (KIND_STFT_COMPLEX, KIND_STFT_MAGNITUDE, KIND_ENCODER):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == KIND_STFT_MAGNITUDE and np.any(values < 0):
            raise ValueError("magnitude features must be nonnegative")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape


def hamming_periodic(n: int) -> np.ndarray:
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * np.arange(n) / n)


def frame_count(n_samples: int, win: int, hop: int) -> int:
    if n_samples < win:
        raise ValueError(f"buffer shorter than one window ({n_samples} < {win} samples)")
    return 1 + (n_samples - win) // hop


def stft_params(sample_rate: int, n_fft: int = N_FFT, win_s: float = WIN_S,
                hop_s: float = HOP_S):
    win = round(sample_rate * win_s)
    hop = round(sample_rate * hop_s)
    if hop < 1 or win < 1:
        raise ValueError(f"window/hop too small at {sample_rate} Hz")
    if win > n_fft:
        raise ValueError(f"window of {win} samples exceeds FFT length {n_fft}")
    return n_fft, win, hop


def stft(buffer: AudioBuffer, n_fft: int = N_FFT, win_s: float = WIN_S,
         hop_s: float = HOP_S) -> FeatureMap:
    """Complex spectrogram, T x (n_fft/2 + 1)."""
    n_fft, win, hop = stft_params(buffer.sample_rate, n_fft, win_s, hop_s)
    t = frame_count(len(buffer), win, hop)
    window = hamming_periodic(win)
    frames = np.lib.stride_tricks.sliding_window_view(buffer.samples, win)[::hop][:t]
    spec = np.fft.rfft(frames * window, n=n_fft, axis=1)
    return FeatureMap(spec, buffer.sample_rate / hop, KIND_STFT_COMPLEX)


def stft_magnitude(buffer: AudioBuffer, **kwargs) -> FeatureMap:
    complex_map = stft(buffer, **kwargs)
    return FeatureMap(np.abs(complex_map.values), complex_map.frame_rate,
                      KIND_STFT_MAGNITUDE)


def istft_overlap_add(spec: np.ndarray, sample_rate: int, out_len: int,
                      n_fft: int = N_FFT, win_s: float = WIN_S,
                      hop_s: float = HOP_S) -> np.ndarray:
    """Inverse transform by overlap-add, normalized by the window overlap sum.

    Samples beyond the last frame's coverage come back as zeros.
    """
    n_fft, win, hop = stft_params(sample_rate, n_fft, win_s, hop_s)
    frames = np.fft.irfft(spec, n=n_fft, axis=1)[:, :win]
    t = spec.shape[0]
    acc = np.zeros(out_len)
    env = np.zeros(out_len)
    window = hamming_periodic(win)
    for i in range(t):
        start = i * hop
        stop = min(start + win, out_len)
        if start >= out_len:
            break
        acc[start:stop] += frames[i, :stop - start]
        env[start:stop] += window[:stop - start]
    covered = env > 1e-6
    out = np.zeros(out_len)
    out[covered] = acc[covered] / env[covered]
    return out


def apply_mask_resynth(noisy: AudioBuffer, mask) -> AudioBuffer:
    """Scale the noisy spectrogram by a [0, 1] mask and resynthesize.

    The mask multiplies the complex spectrogram directly, which scales the
    magnitude and keeps the noisy phase.
    """
    mask_values = mask.values if isinstance(mask, FeatureMap) else np.asarray(mask)
    spec = stft(noisy)
    if mask_values.shape != spec.values.shape:
        raise ValueError(
            f"mask shape {mask_values.shape} does not match the spectrogram "
            f"shape {spec.values.shape}")
    if np.any(mask_values < 0) or np.any(mask_values > 1):
        raise ValueError("mask values must lie in [0, 1]")
    out = istft_overlap_add(spec.values * mask_values, noisy.sample_rate, len(noisy))
    return AudioBuffer(out, noisy.sample_rate)
