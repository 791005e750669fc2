"""Exception types shared across the package."""


class SpeechmixError(Exception):
    """Base class for all package errors."""


class WavError(SpeechmixError):
    """Base class for WAV container problems."""


class MalformedWavError(WavError):
    """The RIFF/WAVE structure itself is broken."""


class UnsupportedWavError(WavError):
    """Valid container, but an encoding this package does not handle."""


class TruncatedWavError(WavError):
    """The data chunk declares more bytes than the file holds."""


class NoActiveSpeechError(SpeechmixError):
    """The active-level meter found no measurable speech activity."""


class SnrUndefinedError(SpeechmixError):
    """The frame-based SNR estimate has an empty speech or nonspeech set."""


class ManifestError(SpeechmixError):
    """A manifest, lengths table or candidate list failed to parse."""


class PoolExhaustedError(SpeechmixError):
    """No candidate recordings left to match."""


class ConfigError(SpeechmixError):
    """Bad run configuration (unknown key, bad value, missing input)."""
