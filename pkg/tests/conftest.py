"""Shared synthetic signal builders and fixture helpers."""

import numpy as np
import pytest

from speechmix import AudioBuffer, write_wav

FS = 16000


def speech_like(duration_s: float, seed: int, rate: int = FS,
                amplitude: float = 0.3) -> AudioBuffer:
    """Noise bursts separated by near-silence, enough structure for P.56/VAD."""
    rng = np.random.default_rng(seed)
    n = int(duration_s * rate)
    x = rng.normal(0.0, 1.0, n)
    env = np.zeros(n)
    pos = int(0.02 * rate)
    while pos < n:
        burst = int(rate * rng.uniform(0.15, 0.4))
        gap = int(rate * rng.uniform(0.08, 0.25))
        env[pos:pos + burst] = rng.uniform(0.5, 1.0)
        pos += burst + gap
    x = x * env * amplitude
    scale = np.max(np.abs(x))
    if scale > 0.95:
        x *= 0.95 / scale
    return AudioBuffer(x, rate)


def noise_like(duration_s: float, seed: int, rate: int = FS,
               amplitude: float = 0.1) -> AudioBuffer:
    """Colored stationary noise (moving-average filtered white noise)."""
    rng = np.random.default_rng(seed)
    n = int(duration_s * rate)
    x = np.convolve(rng.normal(0.0, 1.0, n), np.ones(6) / 6.0, mode="same")
    return AudioBuffer(x * amplitude, rate)


@pytest.fixture
def wav_dir(tmp_path):
    """Write-audio-get-path helper bound to a temp directory."""
    def _write(name: str, buffer: AudioBuffer, encoding: str = "float32"):
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        write_wav(buffer, path, encoding)
        return path
    _write.root = tmp_path
    return _write
