"""End-to-end CLI runs over small synthetic inputs."""

import numpy as np
import pytest

from speechmix import write_wav
from speechmix.cli import main
from tests.conftest import FS, noise_like, speech_like


def _high_snr_clip(duration_s, seed, rate=FS):
    rng = np.random.default_rng(seed)
    n = int(duration_s * rate)
    x = rng.normal(0, 1e-5, n)
    k = int(0.03 * rate)
    for start in range(2 * k, n - k, 4 * k):
        x[start:start + k] += rng.normal(0, 0.3, k)
    from speechmix import AudioBuffer
    return AudioBuffer(x, rate)


@pytest.fixture
def screen_inputs(tmp_path):
    clips = tmp_path / "clips"
    clips.mkdir()
    rows = ["clip_id\tpath\tprompt_text\tvalidated"]
    for i in range(5):
        path = clips / f"c{i}.wav"
        write_wav(_high_snr_clip(2.2, i), path, "float32")
        validated = "true" if i != 1 else "false"
        rows.append(f"c{i}\t{path}\tplenty of words here\t{validated}")
    pool = tmp_path / "pool.tsv"
    pool.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return pool


def test_screen_quota_met(tmp_path, screen_inputs, capsys):
    out = tmp_path / "cand.tsv"
    status = main(["screen", "--pool", str(screen_inputs), "--quota", "3",
                   "--out", str(out)])
    assert status == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4  # header + 3
    summary = (tmp_path / "cand.tsv.summary").read_text()
    assert "selected=3" in summary and "status=0" in summary


def test_screen_shortfall_exit_one(tmp_path, screen_inputs, capsys):
    out = tmp_path / "cand.tsv"
    status = main(["screen", "--pool", str(screen_inputs), "--quota", "10",
                   "--out", str(out)])
    assert status == 1
    assert "shortfall" in capsys.readouterr().err


def test_unknown_config_key_exit_two(tmp_path, screen_inputs, capsys):
    status = main(["screen", "--pool", str(screen_inputs), "--quota", "1",
                   "--out", str(tmp_path / "x.tsv"), "--set", "mixer.typo=1"])
    assert status == 2
    assert "unknown configuration key" in capsys.readouterr().err


def test_missing_input_exit_two(tmp_path, capsys):
    status = main(["screen", "--pool", str(tmp_path / "nope.tsv"), "--quota", "1",
                   "--out", str(tmp_path / "x.tsv")])
    assert status == 2
    assert "nope.tsv" in capsys.readouterr().err


def test_config_file_and_override_precedence(tmp_path, screen_inputs):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("screen.min_snr_db=90\n")  # nothing passes at 90 dB
    out = tmp_path / "cand.tsv"
    status = main(["screen", "--pool", str(screen_inputs), "--quota", "2",
                   "--out", str(out), "--config", str(cfg)])
    assert status == 1  # shortfall: the config file applied
    status = main(["screen", "--pool", str(screen_inputs), "--quota", "2",
                   "--out", str(out), "--config", str(cfg),
                   "--set", "screen.min_snr_db=50"])
    assert status == 0  # the override out-ranks the file


@pytest.fixture
def build_inputs(tmp_path):
    cand_dir = tmp_path / "cands"
    noise_dir = tmp_path / "noise"
    cand_dir.mkdir()
    noise_dir.mkdir()
    cand_rows = ["clip_id\tpath\tduration_s\testimated_snr_db"]
    for i in range(6):
        buf = speech_like(0.4 + 0.02 * i, 50 + i)
        path = cand_dir / f"k{i}.wav"
        write_wav(buf, path, "float32")
        cand_rows.append(f"k{i}\t{path}\t{buf.duration_s!r}\t60.0")
    candidates = tmp_path / "candidates.tsv"
    candidates.write_text("\n".join(cand_rows) + "\n", encoding="utf-8")

    for name, seed in (("bus", 3), ("cafe", 4)):
        write_wav(noise_like(1.5, seed), noise_dir / f"{name}.wav", "float32")

    manifest = tmp_path / "trainset.log"
    manifest.write_text("p001 bus 0\np002 cafe 5\np003 bus 10\np004 cafe 15\n")
    lengths = tmp_path / "lengths.tsv"
    lengths.write_text("clean_id\tseconds\tsamples\n" + "".join(
        f"p{i:03d}\t{0.4 + 0.02 * i}\t{int((0.4 + 0.02 * i) * 48000)}\n"
        for i in range(1, 5)))
    return dict(manifest=manifest, lengths=lengths, candidates=candidates,
                noise_dir=noise_dir)


def test_build_twice_identical(tmp_path, build_inputs):
    trees = []
    for name in ("b1", "b2"):
        out = tmp_path / name
        status = main(["build", "--manifest", str(build_inputs["manifest"]),
                       "--lengths", str(build_inputs["lengths"]),
                       "--candidates", str(build_inputs["candidates"]),
                       "--noise-dir", str(build_inputs["noise_dir"]),
                       "--out", str(out), "--seed", "1234"])
        assert status == 0
        tree = {p.relative_to(out).as_posix(): p.read_bytes()
                for p in sorted(out.rglob("*")) if p.is_file() and p.name != "run_summary.txt"}
        trees.append(tree)
        assert (out / "clean" / "p001.wav").exists()
        assert (out / "noisy" / "p004.wav").exists()
    assert trees[0] == trees[1]


def test_build_missing_noise_dir_exit_two(tmp_path, build_inputs, capsys):
    status = main(["build", "--manifest", str(build_inputs["manifest"]),
                   "--lengths", str(build_inputs["lengths"]),
                   "--candidates", str(build_inputs["candidates"]),
                   "--noise-dir", str(tmp_path / "missing"),
                   "--out", str(tmp_path / "o")])
    assert status == 2


def test_eval_and_feats(tmp_path, build_inputs):
    out = tmp_path / "corpus"
    assert main(["build", "--manifest", str(build_inputs["manifest"]),
                 "--lengths", str(build_inputs["lengths"]),
                 "--candidates", str(build_inputs["candidates"]),
                 "--noise-dir", str(build_inputs["noise_dir"]),
                 "--out", str(out), "--seed", "5"]) == 0

    # toy container for the eval encoder
    from speechmix import ConvLayerSpec, EncoderWeights, FeatureEncoderSpec, write_fenc
    rng = np.random.default_rng(0)
    spec = FeatureEncoderSpec(
        (ConvLayerSpec(1, 4, 64, 32), ConvLayerSpec(4, 8, 2, 2, bias=True)), FS)
    weights = EncoderWeights([
        {"weight": rng.normal(0, 0.1, (4, 1, 64))},
        {"weight": rng.normal(0, 0.3, (8, 4, 2)), "bias": rng.normal(0, 0.1, 8)},
    ])
    fenc = tmp_path / "toy.fenc"
    write_fenc(fenc, spec, weights)

    pairs = tmp_path / "pairs.tsv"
    rows = ["pair_id\tref_path\tdeg_path"]
    for name in ("p001", "p002"):
        rows.append(f"{name}\t{out / 'clean' / (name + '.wav')}\t"
                    f"{out / 'noisy' / (name + '.wav')}")
    pairs.write_text("\n".join(rows) + "\n")
    metrics = tmp_path / "metrics.tsv"
    assert main(["eval", "--pairs", str(pairs), "--weights", str(fenc),
                 "--out", str(metrics)]) == 0
    lines = metrics.read_text().splitlines()
    assert lines[0] == "pair_id\tloss_fe\tloss_spec_mse\tsi_sdr_db"
    assert len(lines) == 3
    for line in lines[1:]:
        fields = line.split("\t")
        assert float(fields[1]) >= 0.0 and float(fields[2]) >= 0.0

    feat_out = tmp_path / "p001.feat"
    assert main(["feats", "--audio", str(out / "clean" / "p001.wav"),
                 "--weights", str(fenc), "--out", str(feat_out)]) == 0
    from speechmix.featio import read_feature_file
    values = read_feature_file(feat_out)
    assert values.shape[1] == 8

    stft_out = tmp_path / "p001.stft.feat"
    assert main(["feats", "--audio", str(out / "clean" / "p001.wav"),
                 "--stft", "--out", str(stft_out)]) == 0
    assert read_feature_file(stft_out).shape[1] == 257
