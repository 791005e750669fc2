"""speechmix: screening, SNR-exact mixing and signal distances for noisy-speech corpora."""

from .audio import AudioBuffer, fit_length
from .builder import (BuildPlan, BuildReport, CandidatePool, ManifestEntry,
                      SplitMix64, build_dataset, carve_validation, match_candidate,
                      parse_lengths, parse_manifest)
from .encoder import (ConvLayerSpec, EncoderWeights, FeatureEncoderSpec,
                      feature_encoder_forward, output_frames, read_fenc, write_fenc)
from .errors import (ConfigError, MalformedWavError, ManifestError,
                     NoActiveSpeechError, PoolExhaustedError, SnrUndefinedError,
                     SpeechmixError, TruncatedWavError, UnsupportedWavError, WavError)
from .levels import ActiveLevelReport, active_level_p56, mean_power
from .losses import loss_fe, loss_spec_mse, si_sdr
from .mixer import MixResult, mix, scaling_factor
from .resample import resample
from .screening import (CandidateRecord, ScreenDecision, screen_candidate,
                        select_candidates)
from .stft import FeatureMap, apply_mask_resynth, stft, stft_magnitude
from .vad import FramePartition, estimate_snr, vad_frames
from .wavio import read_wav, write_wav

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer", "fit_length", "read_wav", "write_wav", "resample",
    "ActiveLevelReport", "active_level_p56", "mean_power",
    "FramePartition", "vad_frames", "estimate_snr",
    "CandidateRecord", "ScreenDecision", "screen_candidate", "select_candidates",
    "MixResult", "mix", "scaling_factor",
    "ManifestEntry", "BuildPlan", "BuildReport", "CandidatePool", "SplitMix64",
    "parse_manifest", "parse_lengths", "match_candidate", "build_dataset",
    "carve_validation",
    "FeatureMap", "stft", "stft_magnitude", "apply_mask_resynth",
    "ConvLayerSpec", "FeatureEncoderSpec", "EncoderWeights",
    "feature_encoder_forward", "output_frames", "read_fenc", "write_fenc",
    "loss_fe", "loss_spec_mse", "si_sdr",
    "SpeechmixError", "WavError", "MalformedWavError", "UnsupportedWavError",
    "TruncatedWavError", "NoActiveSpeechError", "SnrUndefinedError",
    "ManifestError", "PoolExhaustedError", "ConfigError",
    "__version__",
]
