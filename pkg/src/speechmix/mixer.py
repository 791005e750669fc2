"""SNR-targeted mixing: x[n] = s[n] + c * v[n].

The scale c = sqrt(P_s / (P_v * 10^(snr/10))) uses the active speech power
of the clean signal and, for the noise excerpt, either its active level or
its plain mean power (configurable; active level is the default). The
noise offset is an explicit argument so mixing stays pure and replayable;
whoever builds datasets owns the randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .audio import AudioBuffer
from .levels import active_level_p56, mean_power

NOISE_POWER_ESTIMATORS = ("p56", "mean")


@dataclass(frozen=True)
class MixResult:
    mixture: AudioBuffer
    scale_c: float
    noise_offset: int


def scaling_factor(p_s: float, p_v: float, snr_db: float) -> float:
    """sqrt(P_s / (P_v * 10^(snr/10)))."""
    if not p_s > 0.0:
        raise ValueError(f"clean power must be positive, got {p_s}")
    if not p_v > 0.0:
        raise ValueError(f"noise power must be positive, got {p_v}")
    return math.sqrt(p_s / (p_v * 10.0 ** (snr_db / 10.0)))


def noise_power(buffer: AudioBuffer, estimator: str = "p56") -> float:
    if estimator == "p56":
        return active_level_p56(buffer).active_power
    if estimator == "mean":
        return mean_power(buffer)
    raise ValueError(
        f"unknown noise power estimator {estimator!r} (use one of {NOISE_POWER_ESTIMATORS})")


def mix(
    clean: AudioBuffer,
    noise: AudioBuffer,
    snr_db: float,
    offset: int,
    *,
    noise_estimator: str = "p56",
) -> MixResult:
    """Mix a noise excerpt starting at `offset` under the clean signal.

    The mixture is clean + c * noise[offset : offset+len(clean)] with no
    renormalization; samples may leave [-1, 1] and are preserved as floats.
    """
    if clean.sample_rate != noise.sample_rate:
        raise ValueError(
            f"sample rates differ: clean {clean.sample_rate}, noise {noise.sample_rate}")
    if offset < 0:
        raise ValueError(f"offset must be >= 0, got {offset}")
    if offset + len(clean) > len(noise):
        raise ValueError(
            f"noise too short: need {offset + len(clean)} samples from offset "
            f"{offset}, noise has {len(noise)}")
    excerpt = AudioBuffer(noise.samples[offset:offset + len(clean)], noise.sample_rate)
    p_s = active_level_p56(clean).active_power
    p_v = noise_power(excerpt, noise_estimator)
    c = scaling_factor(p_s, p_v, snr_db)
    mixture = AudioBuffer(clean.samples + c * excerpt.samples, clean.sample_rate)
    return MixResult(mixture=mixture, scale_c=c, noise_offset=offset)
