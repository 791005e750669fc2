"""Candidate screening for crowd-sourced speech pools.

A recording survives when it is crowd-validated, at least two seconds long,
has a multi-word prompt and measures at least 50 dB frame-energy SNR. Rules
run in that order and the first failure names the rejection, so the SNR
estimate (the only expensive step) is skipped for clips that fail a cheap
rule first.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

from .audio import AudioBuffer
from .errors import ManifestError, SnrUndefinedError
from .vad import default_frame_len, estimate_snr, vad_frames

MIN_DURATION_S = 2.0
MIN_WORDS = 2
MIN_SNR_DB = 50.0

REASON_NOT_VALIDATED = "not_validated"
REASON_TOO_SHORT = "too_short"
REASON_SINGLE_WORD = "single_word"
REASON_LOW_SNR = "low_snr"
REASON_UNMEASURABLE = "unmeasurable"

_PUNCT = string.punctuation + "¿¡«»“”‘’„‚…—–"


@dataclass(frozen=True)
class CandidateRecord:
    clip_id: str
    path: str
    duration_s: float
    prompt_word_count: int
    validated: bool
    estimated_snr_db: Optional[float] = None


@dataclass(frozen=True)
class ScreenDecision:
    accepted: bool
    snr_db: Optional[float] = None
    reason: Optional[str] = None


def count_prompt_words(prompt: str) -> int:
    """Whitespace tokens that still contain something after trimming punctuation."""
    return sum(1 for tok in prompt.split() if tok.strip(_PUNCT))


def screen_candidate(
    record: CandidateRecord,
    audio: AudioBuffer,
    *,
    min_duration_s: float = MIN_DURATION_S,
    min_words: int = MIN_WORDS,
    min_snr_db: float = MIN_SNR_DB,
    frame_ms: float = 30.0,
    vad: Callable[[AudioBuffer, int], object] = vad_frames,
) -> ScreenDecision:
    """Accept or reject one recording; rejections name the first failed rule."""
    if not record.validated:
        return ScreenDecision(False, reason=REASON_NOT_VALIDATED)
    if record.duration_s < min_duration_s:
        return ScreenDecision(False, reason=REASON_TOO_SHORT)
    if record.prompt_word_count < min_words:
        return ScreenDecision(False, reason=REASON_SINGLE_WORD)
    try:
        frame_len = default_frame_len(audio.sample_rate, frame_ms)
        snr = estimate_snr(audio, vad(audio, frame_len))
    except (SnrUndefinedError, ValueError):
        return ScreenDecision(False, reason=REASON_UNMEASURABLE)
    if not snr >= min_snr_db:
        return ScreenDecision(False, reason=REASON_LOW_SNR)
    return ScreenDecision(True, snr_db=snr)


def select_candidates(
    pool: Sequence[CandidateRecord],
    audio_loader: Callable[[CandidateRecord], AudioBuffer],
    quota: int,
    **screen_kwargs,
):
    """Scan the pool in order, keeping accepted records until the quota fills.

    Returns (selected, shortfall): selected records carry their measured SNR;
    shortfall is how many short of the quota the pool left us (0 on success).
    """
    if quota < 1:
        raise ValueError(f"quota must be >= 1, got {quota}")
    selected = []
    for record in pool:
        if len(selected) == quota:
            break
        decision = screen_candidate(record, audio_loader(record), **screen_kwargs)
        if decision.accepted:
            selected.append(replace(record, estimated_snr_db=decision.snr_db))
    return selected, quota - len(selected)


POOL_HEADER = ("clip_id", "path", "prompt_text", "validated")
CANDIDATES_HEADER = ("clip_id", "path", "duration_s", "estimated_snr_db")

_BOOL = {"true": True, "1": True, "false": False, "0": False}


def read_pool_tsv(path) -> list[dict]:
    """Clip metadata table: clip_id, path, prompt_text, validated (TSV, header)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != POOL_HEADER:
            raise ManifestError(f"{path}: expected header {POOL_HEADER}, got {tuple(header)}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ManifestError(f"{path}:{lineno}: expected 4 fields, got {len(fields)}")
            clip_id, clip_path, prompt, validated = fields
            if validated.lower() not in _BOOL:
                raise ManifestError(f"{path}:{lineno}: bad validated flag {validated!r}")
            rows.append({
                "clip_id": clip_id,
                "path": clip_path,
                "prompt_text": prompt,
                "validated": _BOOL[validated.lower()],
            })
    return rows


def write_candidates_tsv(path, records: Iterable[CandidateRecord]) -> None:
    """Candidate list, UTF-8, LF, floats in shortest round-trip form."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(CANDIDATES_HEADER) + "\n")
        for r in records:
            fh.write(f"{r.clip_id}\t{r.path}\t{r.duration_s!r}\t{r.estimated_snr_db!r}\n")


def read_candidates_tsv(path) -> list[CandidateRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != CANDIDATES_HEADER:
            raise ManifestError(
                f"{path}: expected header {CANDIDATES_HEADER}, got {tuple(header)}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ManifestError(f"{path}:{lineno}: expected 4 fields, got {len(fields)}")
            clip_id, clip_path, duration, snr = fields
            try:
                records.append(CandidateRecord(
                    clip_id=clip_id, path=clip_path, duration_s=float(duration),
                    prompt_word_count=MIN_WORDS, validated=True,
                    estimated_snr_db=float(snr)))
            except ValueError as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from None
    return records
