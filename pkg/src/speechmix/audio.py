"""Mono waveform container and length normalization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable mono waveform: float64 samples plus a sample rate in Hz.

    Samples are nominally in [-1, 1] but are not clamped; all values must be
    finite and the buffer must hold exactly one channel.
    """

    samples: np.ndarray = field(repr=False)
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected a mono (1-D) signal, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or Inf")
        rate = int(self.sample_rate)
        if rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", rate)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate


def fit_length(buffer: AudioBuffer, target_len: int) -> AudioBuffer:
    """Pad with trailing zeros or truncate the tail to exactly target_len samples."""
    if target_len < 1:
        raise ValueError(f"target_len must be >= 1, got {target_len}")
    n = len(buffer)
    if n == target_len:
        return buffer
    if n > target_len:
        out = buffer.samples[:target_len]
    else:
        out = np.concatenate([buffer.samples, np.zeros(target_len - n)])
    return AudioBuffer(out, buffer.sample_rate)
