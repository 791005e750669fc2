"""Manifest-driven corpus construction.

Given a manifest of (clean id, noise id, target SNR) rows, a screened
candidate list, a lengths table for the original clean ids and a noise
library, the builder matches each manifest row to the unused candidate
nearest in duration, conforms it to the target length, mixes at the target
SNR with a seeded random noise offset, and writes clean/noisy WAV pairs
plus a replayable build log. Two builds from identical inputs are
byte-identical.

Randomness: each manifest row gets its own SplitMix64 stream seeded with
(global_seed XOR row_index), so parallel workers need no shared generator
state and row outputs never depend on build order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .audio import AudioBuffer, fit_length
from .errors import ManifestError, PoolExhaustedError, SpeechmixError
from .mixer import mix
from .resample import resample
from .screening import CandidateRecord
from .wavio import read_wav, write_wav

TRAIN_SNRS = (0.0, 5.0, 10.0, 15.0)
TEST_SNRS = (2.5, 7.5, 12.5, 17.5)

_MASK64 = (1 << 64) - 1
_VALIDATION_TAG = 0x56414C49444E5354  # distinct stream for the validation carve

LOG_HEADER = ("clean_id", "candidate_id", "noise_id", "snr_db", "offset", "c")


class SplitMix64:
    """Tiny deterministic 64-bit PRNG (SplitMix64), enough for noise offsets."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Unbiased draw from [0, n) by rejection."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            z = self.next_uint64()
            if z < limit:
                return z % n


@dataclass(frozen=True)
class ManifestEntry:
    clean_id: str
    noise_id: str
    snr_db: float


def parse_manifest(path, allowed_snrs: Optional[Sequence[float]] = None) -> list[ManifestEntry]:
    """Whitespace-separated lines: clean_id noise_id snr_db.

    By default every row's SNR must come from one corpus flavour: all from
    the training set {0, 5, 10, 15} or all from the test set
    {2.5, 7.5, 12.5, 17.5}. Pass allowed_snrs to widen or disable (None here
    means the default policy; an empty sequence disables the check).
    """
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 3:
                raise ManifestError(
                    f"{path}:{lineno}: expected 3 fields (clean_id noise_id snr_db), "
                    f"got {len(fields)}")
            clean_id, noise_id, snr_text = fields
            try:
                snr = float(snr_text)
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: non-numeric SNR {snr_text!r}") from None
            if clean_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate clean_id {clean_id!r}")
            seen.add(clean_id)
            entries.append(ManifestEntry(clean_id, noise_id, snr))

    if allowed_snrs is not None:
        allowed = set(allowed_snrs)
        if allowed:
            bad = sorted({e.snr_db for e in entries} - allowed)
            if bad:
                raise ManifestError(f"{path}: SNR values {bad} outside allowed set {sorted(allowed)}")
    else:
        snrs = {e.snr_db for e in entries}
        if not (snrs <= set(TRAIN_SNRS) or snrs <= set(TEST_SNRS)):
            raise ManifestError(
                f"{path}: SNR values {sorted(snrs)} are not all from one corpus flavour "
                f"(training {TRAIN_SNRS} or test {TEST_SNRS})")
    return entries


@dataclass(frozen=True)
class LengthSpec:
    seconds: float
    samples: int  # at the original corpus source rate; informational


def parse_lengths(path) -> dict[str, LengthSpec]:
    """Lengths table: tab-separated clean_id, seconds, samples (with header)."""
    table = {}
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != ("clean_id", "seconds", "samples"):
            raise ManifestError(
                f"{path}: expected header ('clean_id', 'seconds', 'samples'), got {tuple(header)}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ManifestError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
            clean_id, seconds, samples = fields
            if clean_id in table:
                raise ManifestError(f"{path}:{lineno}: duplicate clean_id {clean_id!r}")
            try:
                table[clean_id] = LengthSpec(float(seconds), int(samples))
            except ValueError as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from None
    return table


class CandidatePool:
    """Mutable pool supporting nearest-duration matching with removal.

    Distances are compared in integer microseconds so decimal-symmetric
    ties (3.9 s vs 4.1 s around 4.0 s) really tie; ties go to the
    lexicographically smallest clip_id.
    """

    def __init__(self, records: Sequence[CandidateRecord]):
        ids = [r.clip_id for r in records]
        if len(set(ids)) != len(ids):
            raise ManifestError("candidate pool has duplicate clip_ids")
        order = sorted(range(len(records)), key=lambda i: records[i].clip_id)
        self._records = [records[i] for i in order]
        self._dur_us = np.array(
            [round(r.duration_s * 1e6) for r in self._records], dtype=np.int64)
        self._alive = np.ones(len(self._records), dtype=bool)
        self._n_alive = len(self._records)

    def __len__(self) -> int:
        return self._n_alive

    def take_nearest(self, target_s: float) -> CandidateRecord:
        if self._n_alive == 0:
            raise PoolExhaustedError("candidate pool exhausted")
        target_us = round(target_s * 1e6)
        dist = np.abs(self._dur_us - target_us)
        dist[~self._alive] = np.iinfo(np.int64).max
        # records are pre-sorted by clip_id, so the first argmin wins ties
        idx = int(np.argmin(dist))
        self._alive[idx] = False
        self._n_alive -= 1
        return self._records[idx]


def match_candidate(target_len_s: float, pool: CandidatePool) -> CandidateRecord:
    """Remove and return the pool record nearest in duration to target_len_s."""
    return pool.take_nearest(target_len_s)


def carve_validation(manifest: Sequence[ManifestEntry], seed: int, size: int) -> list[ManifestEntry]:
    """First `size` entries of a seeded Fisher-Yates shuffle of the manifest."""
    if size > len(manifest):
        raise ValueError(f"validation size {size} exceeds manifest length {len(manifest)}")
    entries = list(manifest)
    rng = SplitMix64((seed ^ _VALIDATION_TAG) & _MASK64)
    for i in range(len(entries) - 1, 0, -1):
        j = rng.next_below(i + 1)
        entries[i], entries[j] = entries[j], entries[i]
    return entries[:size]


@dataclass
class BuildPlan:
    manifest: list[ManifestEntry]
    candidates: list[CandidateRecord]
    noise_library: dict[str, str]  # noise_id -> wav path
    seed: int
    output_dir: str
    lengths: dict[str, LengthSpec] = field(default_factory=dict)
    sample_rate: int = 16000
    noise_estimator: str = "p56"
    encoding: str = "float32"
    validation_size: Optional[int] = None
    jobs: int = 1

    def validate(self) -> None:
        missing = sorted({e.noise_id for e in self.manifest} - set(self.noise_library))
        if missing:
            raise ManifestError(f"noise ids missing from the library: {missing}")
        if len(self.candidates) < len(self.manifest):
            raise ManifestError(
                f"only {len(self.candidates)} candidates for {len(self.manifest)} manifest rows")


@dataclass
class EntryLog:
    clean_id: str
    candidate_id: str
    noise_id: str
    snr_db: float
    offset: int
    c: float

    def as_row(self) -> str:
        return (f"{self.clean_id}\t{self.candidate_id}\t{self.noise_id}\t"
                f"{self.snr_db!r}\t{self.offset}\t{self.c!r}")


@dataclass
class BuildReport:
    entries: int
    built: int
    clip_warnings: int
    errors: list[tuple[str, str]]  # (clean_id, message)
    log_path: str
    validation_path: Optional[str] = None

    @property
    def ok(self) -> bool:
        return not self.errors


def _quantize32(samples: np.ndarray) -> np.ndarray:
    return samples.astype(np.float32).astype(np.float64)


def _load_noise(path, rate: int) -> AudioBuffer:
    buf = read_wav(path)
    if buf.sample_rate != rate:
        buf = resample(buf, rate)
    return AudioBuffer(_quantize32(buf.samples), rate)


def prepare_clean(candidate_path, target_seconds: float, rate: int) -> AudioBuffer:
    """Decode, resample to the output rate, conform length, quantize to float32.

    The float32 quantization happens before mixing so the noisy file equals
    (written clean file + c * noise excerpt) exactly, sample for sample.
    """
    buf = read_wav(candidate_path)
    if buf.sample_rate != rate:
        buf = resample(buf, rate)
    buf = fit_length(buf, _target_samples(target_seconds, rate))
    return AudioBuffer(_quantize32(buf.samples), rate)


def _target_samples(seconds: float, rate: int) -> int:
    return max(1, round(seconds * rate))


def build_dataset(plan: BuildPlan) -> BuildReport:
    """Run the full manifest; returns a report and writes WAV pairs plus logs."""
    plan.validate()
    out_dir = Path(plan.output_dir)
    clean_dir = out_dir / "clean"
    noisy_dir = out_dir / "noisy"
    clean_dir.mkdir(parents=True, exist_ok=True)
    noisy_dir.mkdir(parents=True, exist_ok=True)

    # sequential matching pass: the pool mutates, order matters
    pool = CandidatePool(plan.candidates)
    assignments = []  # (index, entry, candidate | None, error | None)
    for i, entry in enumerate(plan.manifest):
        spec = plan.lengths.get(entry.clean_id)
        if spec is None:
            assignments.append((i, entry, None, f"no lengths entry for {entry.clean_id!r}"))
            continue
        try:
            cand = pool.take_nearest(spec.seconds)
        except PoolExhaustedError as exc:
            assignments.append((i, entry, None, str(exc)))
            continue
        assignments.append((i, entry, cand, None))

    noise_cache = {
        nid: _load_noise(plan.noise_library[nid], plan.sample_rate)
        for nid in sorted({e.noise_id for e in plan.manifest})
    }

    def run_entry(job):
        i, entry, cand, err = job
        if err is not None:
            return i, None, 0, (entry.clean_id, err)
        try:
            seconds = plan.lengths[entry.clean_id].seconds
            clean = prepare_clean(cand.path, seconds, plan.sample_rate)
            noise = noise_cache[entry.noise_id]
            span = len(noise) - len(clean)
            if span < 0:
                raise SpeechmixError(
                    f"noise {entry.noise_id!r} shorter than the clean signal "
                    f"({len(noise)} < {len(clean)} samples)")
            rng = SplitMix64((plan.seed ^ i) & _MASK64)
            offset = rng.next_below(span + 1)
            result = mix(clean, noise, entry.snr_db, offset,
                         noise_estimator=plan.noise_estimator)
            clips = write_wav(clean, clean_dir / f"{entry.clean_id}.wav", plan.encoding)
            clips += write_wav(result.mixture, noisy_dir / f"{entry.clean_id}.wav",
                               plan.encoding)
            log = EntryLog(entry.clean_id, cand.clip_id, entry.noise_id,
                           entry.snr_db, offset, result.scale_c)
            return i, log, clips, None
        except SpeechmixError as exc:
            return i, None, 0, (entry.clean_id, str(exc))

    if plan.jobs > 1:
        with ThreadPoolExecutor(max_workers=plan.jobs) as pool_exec:
            results = list(pool_exec.map(run_entry, assignments))
    else:
        results = [run_entry(job) for job in assignments]
    results.sort(key=lambda r: r[0])

    logs = [r[1] for r in results if r[1] is not None]
    clip_warnings = sum(r[2] for r in results)
    errors = [r[3] for r in results if r[3] is not None]

    log_path = out_dir / "build_log.tsv"
    with open(log_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(LOG_HEADER) + "\n")
        for log in logs:
            fh.write(log.as_row() + "\n")

    validation_path = None
    if plan.validation_size:
        val = carve_validation(plan.manifest, plan.seed, plan.validation_size)
        validation_path = out_dir / "validation.tsv"
        with open(validation_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("clean_id\n")
            for entry in val:
                fh.write(entry.clean_id + "\n")

    return BuildReport(
        entries=len(plan.manifest),
        built=len(logs),
        clip_warnings=clip_warnings,
        errors=errors,
        log_path=str(log_path),
        validation_path=str(validation_path) if validation_path else None,
    )


def read_build_log(path) -> list[EntryLog]:
    logs = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != LOG_HEADER:
            raise ManifestError(f"{path}: expected header {LOG_HEADER}, got {tuple(header)}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != len(LOG_HEADER):
                raise ManifestError(f"{path}:{lineno}: expected {len(LOG_HEADER)} fields")
            logs.append(EntryLog(fields[0], fields[1], fields[2],
                                 float(fields[3]), int(fields[4]), float(fields[5])))
    return logs


def replay_entry(log: EntryLog, output_dir, noise_library: dict[str, str],
                 sample_rate: int) -> np.ndarray:
    """Reconstruct one noisy signal from the build log and the written clean file."""
    clean = read_wav(Path(output_dir) / "clean" / f"{log.clean_id}.wav")
    noise = _load_noise(noise_library[log.noise_id], sample_rate)
    excerpt = noise.samples[log.offset:log.offset + len(clean)]
    return clean.samples + log.c * excerpt
