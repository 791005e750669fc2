"""Command-line front end: screen, build, eval and feats subcommands.

Exit status: 0 when everything succeeded, 1 when the run completed with
per-item failures or a shortfall (each listed on stderr), 2 for
configuration problems (unknown keys, missing inputs, bad flags).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .audio import fit_length
from .builder import BuildPlan, build_dataset, parse_lengths, parse_manifest
from .config import load_config, write_summary
from .encoder import feature_encoder_forward, read_fenc
from .errors import ConfigError, ManifestError, SpeechmixError, WavError
from .featio import write_feature_file
from .losses import loss_fe, loss_spec_mse, si_sdr
from .screening import (CandidateRecord, count_prompt_words, read_candidates_tsv,
                        read_pool_tsv, screen_candidate, write_candidates_tsv)
from .stft import stft_magnitude
from .wavio import read_wav

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _add_common(parser):
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one configuration key")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for every random choice in the run")
    parser.add_argument("--jobs", type=int, default=1, help="worker count")
    parser.add_argument("--summary", help="run summary path (key=value lines)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speechmix",
        description="Screen speech pools, build SNR-exact noisy corpora, "
                    "and measure reference/degraded distances.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("screen", help="screen a clip pool into a candidate list")
    p.add_argument("--pool", required=True, help="clip metadata TSV")
    p.add_argument("--quota", required=True, type=int)
    p.add_argument("--out", required=True, help="candidate list TSV to write")
    _add_common(p)

    p = sub.add_parser("build", help="build a clean/noisy corpus from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--lengths", required=True, help="clean_id/seconds/samples TSV")
    p.add_argument("--candidates", required=True, help="candidate list TSV")
    p.add_argument("--noise-dir", required=True, help="directory of noise WAVs")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--validation-size", type=int, default=None,
                   help="carve a validation split of this many entries")
    _add_common(p)

    p = sub.add_parser("eval", help="compute distances for reference/degraded pairs")
    p.add_argument("--pairs", required=True, help="TSV: pair_id, ref_path, deg_path")
    p.add_argument("--weights", required=True, help=".fenc feature-encoder container")
    p.add_argument("--out", required=True, help="metrics TSV to write")
    _add_common(p)

    p = sub.add_parser("feats", help="write the feature matrix of one audio file")
    p.add_argument("--audio", required=True)
    p.add_argument("--out", required=True, help="feature file to write")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--weights", help=".fenc container for encoder features")
    group.add_argument("--stft", action="store_true", help="magnitude spectrogram instead")
    _add_common(p)
    return parser


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {p}")
    return p


def cmd_screen(args, config) -> tuple[int, dict]:
    pool_rows = read_pool_tsv(_require_file(args.pool, "pool table"))
    failures = []
    selected = []
    for row in pool_rows:
        if len(selected) == args.quota:
            break
        try:
            audio = read_wav(row["path"])
        except (WavError, OSError) as exc:
            failures.append(f"{row['clip_id']}: {exc}")
            continue
        record = CandidateRecord(
            clip_id=row["clip_id"], path=row["path"],
            duration_s=audio.duration_s,
            prompt_word_count=count_prompt_words(row["prompt_text"]),
            validated=row["validated"])
        decision = screen_candidate(
            record, audio,
            min_duration_s=config["screen.min_duration_s"],
            min_words=config["screen.min_words"],
            min_snr_db=config["screen.min_snr_db"],
            frame_ms=config["vad.frame_ms"])
        if decision.accepted:
            selected.append(CandidateRecord(
                record.clip_id, record.path, record.duration_s,
                record.prompt_word_count, record.validated, decision.snr_db))
    write_candidates_tsv(args.out, selected)
    shortfall = max(0, args.quota - len(selected))
    for message in failures:
        print(f"screen: {message}", file=sys.stderr)
    if shortfall:
        print(f"screen: shortfall of {shortfall} below quota {args.quota}", file=sys.stderr)
    status = EXIT_OK if not failures and shortfall == 0 else EXIT_PARTIAL
    return status, {"selected": len(selected), "shortfall": shortfall,
                    "errors": len(failures), "out": args.out}


def cmd_build(args, config) -> tuple[int, dict]:
    noise_dir = Path(args.noise_dir)
    if not noise_dir.is_dir():
        raise ConfigError(f"noise directory not found: {noise_dir}")
    noise_library = {p.stem: str(p) for p in sorted(noise_dir.glob("*.wav"))}
    validation = args.validation_size
    if validation is None:
        validation = config["build.validation_size"] or None
    plan = BuildPlan(
        manifest=parse_manifest(_require_file(args.manifest, "manifest")),
        candidates=read_candidates_tsv(_require_file(args.candidates, "candidate list")),
        noise_library=noise_library,
        seed=args.seed,
        output_dir=args.out,
        lengths=parse_lengths(_require_file(args.lengths, "lengths table")),
        sample_rate=config["build.sample_rate"],
        noise_estimator=config["mixer.noise_power"],
        encoding=config["build.encoding"],
        validation_size=validation,
        jobs=args.jobs,
    )
    report = build_dataset(plan)
    for clean_id, message in report.errors:
        print(f"build: {clean_id}: {message}", file=sys.stderr)
    status = EXIT_OK if report.ok else EXIT_PARTIAL
    return status, {"entries": report.entries, "built": report.built,
                    "clip_warnings": report.clip_warnings,
                    "errors": len(report.errors), "log": report.log_path,
                    "validation": report.validation_path or "", "out": args.out}


def _read_pairs(path) -> list[tuple[str, str, str]]:
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != ("pair_id", "ref_path", "deg_path"):
            raise ManifestError(
                f"{path}: expected header ('pair_id', 'ref_path', 'deg_path')")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ManifestError(f"{path}:{lineno}: expected 3 fields")
            pairs.append((fields[0], fields[1], fields[2]))
    return pairs


def cmd_eval(args, config) -> tuple[int, dict]:
    spec, weights, _header = read_fenc(_require_file(args.weights, "weight container"))
    pairs = _read_pairs(_require_file(args.pairs, "pairs table"))
    stft_kwargs = {"n_fft": config["stft.n_fft"], "win_s": config["stft.win_s"],
                   "hop_s": config["stft.hop_s"]}
    failures = []
    rows = []
    for pair_id, ref_path, deg_path in pairs:
        try:
            ref = read_wav(ref_path)
            deg = read_wav(deg_path)
            if len(deg) != len(ref):
                deg = fit_length(deg, len(ref))
            fe = loss_fe(feature_encoder_forward(ref, spec, weights),
                         feature_encoder_forward(deg, spec, weights))
            spec_mse = loss_spec_mse(ref, deg, **stft_kwargs)
            sdr = si_sdr(ref, deg)
            rows.append(f"{pair_id}\t{fe!r}\t{spec_mse!r}\t{sdr!r}")
        except (SpeechmixError, ValueError, OSError) as exc:
            failures.append(f"{pair_id}: {exc}")
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pair_id\tloss_fe\tloss_spec_mse\tsi_sdr_db\n")
        for row in rows:
            fh.write(row + "\n")
    for message in failures:
        print(f"eval: {message}", file=sys.stderr)
    status = EXIT_OK if not failures else EXIT_PARTIAL
    return status, {"pairs": len(pairs), "evaluated": len(rows),
                    "errors": len(failures), "out": args.out}


def cmd_feats(args, config) -> tuple[int, dict]:
    audio = read_wav(_require_file(args.audio, "audio file"))
    if args.stft:
        features = stft_magnitude(audio, n_fft=config["stft.n_fft"],
                                  win_s=config["stft.win_s"], hop_s=config["stft.hop_s"])
    else:
        spec, weights, _header = read_fenc(_require_file(args.weights, "weight container"))
        features = feature_encoder_forward(audio, spec, weights)
    write_feature_file(args.out, features.values)
    return EXIT_OK, {"frames": features.shape[0], "features": features.shape[1],
                     "out": args.out}


_COMMANDS = {"screen": cmd_screen, "build": cmd_build, "eval": cmd_eval,
             "feats": cmd_feats}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        status, outcome = _COMMANDS[args.subcommand](args, config)
    except (ConfigError, ManifestError) as exc:
        print(f"speechmix: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpeechmixError as exc:
        print(f"speechmix: {exc}", file=sys.stderr)
        return EXIT_PARTIAL

    summary_path = args.summary
    if summary_path is None:
        out = getattr(args, "out", None)
        if out is not None:
            out_path = Path(out)
            summary_path = (out_path / "run_summary.txt" if out_path.is_dir()
                            else out_path.with_name(out_path.name + ".summary"))
    if summary_path is not None:
        outcome = dict(outcome)
        outcome.update({"subcommand": args.subcommand, "seed": args.seed,
                        "jobs": args.jobs, "status": status})
        write_summary(summary_path, config, outcome)
    return status


if __name__ == "__main__":
    sys.exit(main())
