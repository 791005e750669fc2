"""Run configuration: a flat key=value file plus command-line overrides.

Keys are dotted, one per line; unknown keys are rejected outright so a
typo cannot silently fall back to a default. Flag overrides win over the
file. The fully resolved configuration lands in the run summary.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1"):
        return True
    if lowered in ("false", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options):
    def convert(text):
        if text not in options:
            raise ValueError(f"must be one of {options}, got {text!r}")
        return text
    return convert


# key -> (converter, default)
SCHEMA = {
    "mixer.noise_power": (_choice("p56", "mean"), "p56"),
    "vad.frame_ms": (float, 30.0),
    "screen.min_duration_s": (float, 2.0),
    "screen.min_words": (int, 2),
    "screen.min_snr_db": (float, 50.0),
    "build.sample_rate": (int, 16000),
    "build.encoding": (_choice("float32", "pcm16"), "float32"),
    "build.validation_size": (int, 0),
    "stft.n_fft": (int, 512),
    "stft.win_s": (float, 0.032),
    "stft.hop_s": (float, 0.016),
}


def defaults() -> dict:
    return {key: default for key, (_conv, default) in SCHEMA.items()}


def _apply(config: dict, key: str, raw: str, origin: str) -> None:
    if key not in SCHEMA:
        raise ConfigError(f"{origin}: unknown configuration key {key!r}")
    converter, _default = SCHEMA[key]
    try:
        config[key] = converter(raw)
    except ValueError as exc:
        raise ConfigError(f"{origin}: bad value for {key}: {exc}") from None


def load_config(path=None, overrides=()) -> dict:
    """Resolve defaults <- config file <- key=value overrides, in that order."""
    config = defaults()
    if path is not None:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"config file not found: {file_path}")
        for lineno, line in enumerate(file_path.read_text(encoding="utf-8").splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{file_path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = stripped.partition("=")
            _apply(config, key.strip(), value.strip(), f"{file_path}:{lineno}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, value = item.partition("=")
        _apply(config, key.strip(), value.strip(), f"--set {item}")
    return config


def write_summary(path, config: dict, extra: dict) -> None:
    """Machine-readable key=value run summary (resolved config plus outcomes)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(config):
            fh.write(f"config.{key}={config[key]}\n")
        for key in sorted(extra):
            fh.write(f"{key}={extra[key]}\n")
