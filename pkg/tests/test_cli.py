import json

import numpy as np
import pytest

from voicestate.audio import write_wav
from voicestate.cli import main
from voicestate.corpus import parse_manifest
from voicestate.evaluation import read_pgm, task_label
from voicestate.functionals import BRUTE_DIM, read_feature_csv

from conftest import tone


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def cli_corpus(tmp_path_factory):
    """Full default-size corpus plus its egemaps CSV, produced through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--seed", "42", "--out", str(root / "c")]) == 0
    manifest = root / "c" / "manifest.csv"
    assert main(["extract", "--manifest", str(manifest), "--set", "egemaps",
                 "--out", str(root / "f.csv")]) == 0
    return root, manifest, root / "f.csv"


@pytest.fixture
def small_corpus(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"n_speakers": 1, "clips_per_speaker": 2, "seed": 3}))
    assert main(["synth", "--spec", str(spec), "--out", str(tmp_path / "c")]) == 0
    return tmp_path / "c" / "manifest.csv"


def test_synth_prints_manifest(tmp_path, capsys):
    spec = tmp_path / "spec.toml"
    spec.write_text("n_speakers = 1\nclips_per_speaker = 1\n")
    code, out, _ = run(capsys, "synth", "--spec", spec, "--out", tmp_path / "o")
    assert code == 0
    assert out.strip() == str(tmp_path / "o" / "manifest.csv")
    assert len(parse_manifest(out.strip())) == 3


def test_synth_missing_spec(tmp_path, capsys):
    code, _, err = run(capsys, "synth", "--spec", tmp_path / "nope.json", "--out", tmp_path)
    assert code == 2 and "nope.json" in err


def test_synth_bad_spec(tmp_path, capsys):
    spec = tmp_path / "bad.json"
    spec.write_text('{"n_speakers": 0}')
    assert run(capsys, "synth", "--spec", spec, "--out", tmp_path / "o")[0] == 2


def test_synth_unwritable_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(capsys, "synth", "--out", blocker / "sub")[0] == 3


def test_extract_width(cli_corpus):
    _, _, features = cli_corpus
    t = read_feature_csv(features)
    assert t.values.shape == (150, 88)
    assert open(features).readline().count(",") == 88


def test_extract_brute(small_corpus, tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run(capsys, "extract", "--manifest", small_corpus, "--set", "brute", "--out", out)[0] == 0
    t = read_feature_csv(out)
    assert t.values.shape == (6, BRUTE_DIM) and t.set_id == "BRUTE"
    out2 = tmp_path / "b2.csv"
    run(capsys, "extract", "--manifest", small_corpus, "--set", "brute", "--out", out2, "--jobs", "2")
    assert out.read_bytes() == out2.read_bytes()


def test_extract_skips_corrupt_file(small_corpus, tmp_path, capsys):
    meta = parse_manifest(small_corpus)
    bad = meta[2]
    bad.resolve(small_corpus.parent).write_bytes(b"RIFF\x00\x00garbage")
    out = tmp_path / "f.csv"
    code, _, err = run(capsys, "extract", "--manifest", small_corpus, "--out", out)
    assert code == 0
    assert bad.recording_id in err
    assert len(read_feature_csv(out).recording_ids) == len(meta) - 1


def test_extract_bad_manifest(tmp_path, capsys):
    m = tmp_path / "m.csv"
    m.write_text("recording_id,path\nr1,a.wav\n")
    assert run(capsys, "extract", "--manifest", m, "--out", tmp_path / "f.csv")[0] == 2
    assert run(capsys, "extract", "--manifest", tmp_path / "none.csv", "--out", tmp_path / "f.csv")[0] == 2


def test_evaluate_default_grid(cli_corpus, capsys):
    root, manifest, features = cli_corpus
    report = root / "r.json"
    code, out, _ = run(capsys, "evaluate", "--features", features, "--manifest", manifest,
                       "--task", "severity", "--report", report)
    assert code == 0
    uar = float(out.split("UAR=")[1].split()[0])
    assert uar >= 0.90
    data = json.loads(report.read_text())
    assert len(data["results"]) == 8 and data["n_folds"] == 30


def test_evaluate_single_c(cli_corpus, capsys):
    root, manifest, features = cli_corpus
    report = root / "one.json"
    assert run(capsys, "evaluate", "--features", features, "--manifest", manifest,
               "--task", "severity", "--c-grid", "1e-6", "--report", report)[0] == 0
    assert [r["C"] for r in json.loads(report.read_text())["results"]] == [1e-6]


def test_evaluate_missing_label(cli_corpus, tmp_path, capsys):
    _, manifest, features = cli_corpus
    text = manifest.read_text().splitlines()
    # blank the sleep column of one row
    cells = text[1].split(",")
    cells[5] = ""
    stripped = tmp_path / "m.csv"
    stripped.write_text("\n".join([text[0], ",".join(cells)] + text[2:]) + "\n")
    meta = parse_manifest(stripped)
    assert meta[0].sleep is None
    # paths are relative to the manifest, but evaluate never opens them
    assert run(capsys, "evaluate", "--features", features, "--manifest", stripped,
               "--task", "sleep", "--report", tmp_path / "r.json")[0] == 2


def test_evaluate_bad_grid(cli_corpus, tmp_path, capsys):
    _, manifest, features = cli_corpus
    assert run(capsys, "evaluate", "--features", features, "--manifest", manifest,
               "--task", "severity", "--c-grid", "-1", "--report", tmp_path / "r.json")[0] == 2


def test_train_predict_roundtrip(cli_corpus, capsys):
    root, manifest, features = cli_corpus
    model = root / "model.json"
    assert run(capsys, "train", "--features", features, "--manifest", manifest,
               "--task", "severity", "--c", "0.01", "--model", model)[0] == 0
    meta = parse_manifest(manifest)
    for m in meta[::25]:
        code, out, _ = run(capsys, "predict", "--model", model, "--wav", m.resolve(manifest.parent))
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == task_label(m, "severity")
        assert len(lines) == 4
        again = run(capsys, "predict", "--model", model, "--wav", m.resolve(manifest.parent))[1]
        assert again == out


def test_predict_set_mismatch(cli_corpus, capsys):
    root, manifest, features = cli_corpus
    model = root / "m2.json"
    run(capsys, "train", "--features", features, "--manifest", manifest,
        "--task", "severity", "--c", "0.01", "--model", model)
    wav = parse_manifest(manifest)[0].resolve(manifest.parent)
    assert run(capsys, "predict", "--model", model, "--wav", wav, "--set", "brute")[0] == 4


def test_predict_missing_inputs(tmp_path, capsys):
    assert run(capsys, "predict", "--model", tmp_path / "m.json", "--wav", tmp_path / "a.wav")[0] == 2


def test_spectrogram_command(tmp_path, capsys):
    write_wav(tmp_path / "t.wav", tone(440, 1.0))
    assert run(capsys, "spectrogram", "--wav", tmp_path / "t.wav", "--out", tmp_path / "s")[0] == 0
    img = read_pgm(tmp_path / "s.pgm")
    assert img.shape[0] - 1 - int(np.argmax(img.mean(axis=1))) == round(440 / (16000 / 512))
    write_wav(tmp_path / "z.wav", tone(440, 1.0, amp=0.0))
    assert run(capsys, "spectrogram", "--wav", tmp_path / "z.wav", "--out", tmp_path / "z")[0] == 0
    assert np.all(read_pgm(tmp_path / "z.pgm") == 0)


def test_spectrogram_missing_wav(tmp_path, capsys):
    assert run(capsys, "spectrogram", "--wav", tmp_path / "none.wav", "--out", tmp_path / "s")[0] == 2


def test_help_documents_schemas(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "manifest CSV" in out and "exit codes" in out
