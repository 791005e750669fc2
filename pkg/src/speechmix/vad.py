"""Frame partitioning (voice activity) and the frame-energy SNR estimate.

The default detector is a plain adaptive-energy gate: a frame counts as
speech when its energy exceeds the noise floor (10th percentile of all
frame energies) by 6 dB. Anything mapping (buffer, frame_len) to a
FramePartition can be substituted for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer
from .errors import SnrUndefinedError

DEFAULT_FRAME_MS = 30.0
SPEECH_GATE_DB = 6.0
FLOOR_PERCENTILE = 10.0


@dataclass(frozen=True)
class FramePartition:
    """Disjoint speech/nonspeech frame indices covering all whole frames."""

    frame_len: int
    speech_frames: np.ndarray
    nonspeech_frames: np.ndarray

    def __post_init__(self):
        speech = np.asarray(self.speech_frames, dtype=np.int64)
        nonspeech = np.asarray(self.nonspeech_frames, dtype=np.int64)
        if np.intersect1d(speech, nonspeech).size:
            raise ValueError("speech and nonspeech frame sets overlap")
        object.__setattr__(self, "speech_frames", speech)
        object.__setattr__(self, "nonspeech_frames", nonspeech)

    @property
    def n_frames(self) -> int:
        return self.speech_frames.size + self.nonspeech_frames.size


def frame_energies(buffer: AudioBuffer, frame_len: int) -> np.ndarray:
    """Energy sum x^2 of each whole frame; the trailing partial frame is dropped."""
    if frame_len < 1:
        raise ValueError(f"frame_len must be >= 1, got {frame_len}")
    n_frames = len(buffer) // frame_len
    if n_frames == 0:
        raise ValueError(
            f"buffer shorter than one frame ({len(buffer)} < {frame_len} samples)")
    x = buffer.samples[:n_frames * frame_len].reshape(n_frames, frame_len)
    return np.einsum("ij,ij->i", x, x)


def default_frame_len(sample_rate: int, frame_ms: float = DEFAULT_FRAME_MS) -> int:
    return max(1, round(sample_rate * frame_ms / 1000.0))


def vad_frames(buffer: AudioBuffer, frame_len: int) -> FramePartition:
    """Adaptive-energy voice activity detection over whole frames."""
    energies = frame_energies(buffer, frame_len)
    floor = np.percentile(energies, FLOOR_PERCENTILE)
    gate = floor * 10.0 ** (SPEECH_GATE_DB / 10.0)
    speech = energies > gate
    idx = np.arange(energies.size, dtype=np.int64)
    return FramePartition(frame_len, idx[speech], idx[~speech])


def estimate_snr(buffer: AudioBuffer, partition: FramePartition) -> float:
    """SNR in dB: ratio of mean speech-frame energy to mean nonspeech-frame energy.

    Returns math.inf when the nonspeech frames are digitally silent (and
    -inf in the mirror-image degenerate case of silent speech frames).
    """
    if partition.speech_frames.size == 0 or partition.nonspeech_frames.size == 0:
        raise SnrUndefinedError(
            f"need at least one frame of each kind, got "
            f"{partition.speech_frames.size} speech / "
            f"{partition.nonspeech_frames.size} nonspeech")
    energies = frame_energies(buffer, partition.frame_len)
    if partition.n_frames != energies.size:
        raise ValueError(
            f"partition covers {partition.n_frames} frames but the buffer has "
            f"{energies.size}")
    speech_mean = float(np.mean(energies[partition.speech_frames]))
    noise_mean = float(np.mean(energies[partition.nonspeech_frames]))
    if noise_mean == 0.0:
        return math.inf
    if speech_mean == 0.0:
        return -math.inf
    return 10.0 * math.log10(speech_mean / noise_mean)
