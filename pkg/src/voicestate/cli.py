"""Command-line entry point.

Exit codes: 0 success, 2 input/config error, 3 I/O error,
4 model/feature-set mismatch.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .audio import load_wav, normalize
from .classifier import LinearSvmModel, train
from .corpus import SynthSpec, generate_corpus, parse_manifest
from .errors import (DimensionMismatch, IoFailure, ManifestError, MisalignedManifest,
                     MissingLabel, VoiceStateError)
from .evaluation import DEFAULT_C_GRID, TASKS, align, export_spectrogram, run_loso, task_label
from .functionals import read_feature_csv, write_feature_csv
from .lld import LldConfig
from .pipeline import SET_ALIASES, extract_corpus, features_from_wav, manifest_dir

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_MISMATCH = 0, 2, 3, 4

SCHEMAS = """\
file formats:
  manifest CSV   recording_id,path,speaker_id,sentence_id,days_in_hospital,
                 sleep,fatigue,anxiety[,gender,age,height,weight]
                 levels are low|mid|high; paths relative to the manifest
  features CSV   recording_id,<feature names...>, one row per recording
  model JSON     format_version, task, feature_set, classes, C, class_weight,
                 means, stds, weights{class: [...]}, bias{class: b}
  report JSON    format_version, task, feature_set, n_folds, c_grid, best_C,
                 results[{C, uar, war, f1, f1_weighted, confusion, predictions}]

exit codes: 0 ok, 2 input/config error, 3 I/O error, 4 model/feature-set mismatch
"""


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _need_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(EXIT_INPUT, f"{what} not found: {p}")
    return p


def _load_config(path) -> LldConfig:
    if path is None:
        return LldConfig()
    p = _need_file(path, "config file")
    try:
        return LldConfig.from_file(p)
    except (ValueError, TypeError) as exc:
        raise CliError(EXIT_INPUT, f"bad config {p}: {exc}") from exc


def _manifest(path):
    p = _need_file(path, "manifest")
    try:
        return parse_manifest(p)
    except ManifestError as exc:
        raise CliError(EXIT_INPUT, f"{p}: {exc}") from exc


def _features(path):
    p = _need_file(path, "features file")
    try:
        return read_feature_csv(p)
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"{p}: {exc}") from exc


def _parse_grid(text: str | None):
    if text is None:
        return list(DEFAULT_C_GRID)
    try:
        grid = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"bad --c-grid {text!r}") from exc
    if not grid or any(c <= 0 for c in grid):
        raise CliError(EXIT_INPUT, "--c-grid needs positive values")
    return grid


# ----------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    if args.spec is not None:
        p = _need_file(args.spec, "synth spec")
        try:
            spec = SynthSpec.from_file(p)
        except (ValueError, TypeError, KeyError) as exc:
            raise CliError(EXIT_INPUT, f"bad synth spec {p}: {exc}") from exc
    else:
        spec = SynthSpec()
    if args.seed is not None:
        spec = SynthSpec(**{**spec.__dict__, "seed": args.seed})
    try:
        manifest = generate_corpus(spec, args.out)
    except IoFailure as exc:
        raise CliError(EXIT_IO, f"cannot write corpus to {args.out}: {exc}") from exc
    print(manifest)
    return EXIT_OK


def cmd_extract(args) -> int:
    meta = _manifest(args.manifest)
    config = _load_config(args.config)
    if args.energy_floor_db is not None:
        config = LldConfig(**{**config.to_dict(), "energy_floor_db": args.energy_floor_db})
    vectors, rejects = extract_corpus(meta, manifest_dir(args.manifest), args.set,
                                      config, jobs=args.jobs)
    for r in rejects:
        print(f"rejected {r}", file=sys.stderr)
    if not vectors:
        raise CliError(EXIT_INPUT, "no recording could be processed")
    try:
        write_feature_csv(args.out, vectors)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {len(vectors)} rows x {len(vectors[0])} features to {args.out}")
    return EXIT_OK


def _aligned(args):
    table = _features(args.features)
    meta = _manifest(args.manifest)
    try:
        kept, X, notes = align(table, meta)
        for m in kept:
            task_label(m, args.task)
    except (MisalignedManifest, MissingLabel) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc
    for n in notes:
        print(f"warning: {n}", file=sys.stderr)
    return table, kept, X


def cmd_evaluate(args) -> int:
    grid = _parse_grid(args.c_grid)
    table, meta, _ = _aligned(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = run_loso(table, meta, args.task, grid, jobs=args.jobs)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    try:
        report.save(args.report)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.report}: {exc}") from exc
    b = report.best
    print(f"best C={b.C:g} UAR={b.uar:.4f} WAR={b.war:.4f} F1={b.f1:.4f}")
    return EXIT_OK


def cmd_train(args) -> int:
    if args.c <= 0:
        raise CliError(EXIT_INPUT, "--c must be positive")
    table, meta, X = _aligned(args)
    y = [task_label(m, args.task) for m in meta]
    try:
        model = train(X, y, args.c, task=args.task, feature_set=table.set_id or "CUSTOM",
                      feature_names=table.names)
    except VoiceStateError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc
    try:
        model.save(args.model)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.model}: {exc}") from exc
    print(f"trained {args.task} model on {len(y)} rows, classes {list(model.classes)}")
    return EXIT_OK


def cmd_predict(args) -> int:
    p = _need_file(args.model, "model file")
    try:
        model = LinearSvmModel.load(p)
    except (ValueError, KeyError) as exc:
        raise CliError(EXIT_INPUT, f"bad model file {p}: {exc}") from exc
    wav = _need_file(args.wav, "wav file")
    if model.feature_set not in SET_ALIASES:
        raise CliError(EXIT_MISMATCH, f"model feature set {model.feature_set!r} is not extractable")
    if args.set is not None and SET_ALIASES[args.set] != model.feature_set:
        raise CliError(EXIT_MISMATCH, f"model was trained on {model.feature_set}, "
                                      f"not {SET_ALIASES[args.set]}")
    config = _load_config(args.config)
    try:
        vec = features_from_wav(wav, model.feature_set, config)
    except VoiceStateError as exc:
        raise CliError(EXIT_INPUT, f"{wav}: {exc}") from exc
    if model.feature_names and tuple(vec.names) != tuple(model.feature_names):
        raise CliError(EXIT_MISMATCH, "extracted feature layout differs from the model's")
    try:
        x = model.standardizer.transform(vec.values)
        scores = model.decision_function(x)
    except DimensionMismatch as exc:
        raise CliError(EXIT_MISMATCH, str(exc)) from exc
    print(model.classes[int(np.argmax(scores))])
    for c, s in zip(model.classes, scores):
        print(f"{c}\t{float(s)!r}")
    return EXIT_OK


def cmd_spectrogram(args) -> int:
    wav = _need_file(args.wav, "wav file")
    try:
        clip = normalize(load_wav(wav))
    except VoiceStateError as exc:
        raise CliError(EXIT_INPUT, f"{wav}: {exc}") from exc
    try:
        spec = export_spectrogram(clip, args.out)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.out}.pgm/.csv: {exc}") from exc
    except VoiceStateError as exc:
        raise CliError(EXIT_INPUT, f"{wav}: {exc}") from exc
    print(f"{args.out}.pgm {args.out}.csv ({spec.db.shape[0]} frames x {spec.db.shape[1]} bins)")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="voicestate",
        description="Acoustic features, class-weighted linear SVMs and LOSO evaluation "
                    "for speech-based patient-state classification.",
        epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labelled corpus")
    p.add_argument("--spec", help="synth spec (.json or .toml); defaults to 3 classes x 10 speakers x 5 clips")
    p.add_argument("--seed", type=int, default=None, help="overrides the spec's seed (default 0)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="manifest -> feature CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--set", choices=["egemaps", "brute"], default="egemaps")
    p.add_argument("--out", required=True, help="feature CSV to write")
    p.add_argument("--config", help="LLD config (.toml or .json, optional [lld] table)")
    p.add_argument("--energy-floor-db", type=float, default=None,
                   help="edge-trimming floor in dBFS (default -45)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; extraction is deterministic")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="LOSO evaluation over a C grid")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--task", choices=TASKS, required=True)
    p.add_argument("--c-grid", help="comma-separated C values (default 1e-7,...,1e0)")
    p.add_argument("--report", required=True, help="report JSON to write")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; evaluation is deterministic")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("train", help="fit one model on all rows")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--task", choices=TASKS, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--model", required=True, help="model JSON to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify one WAV file")
    p.add_argument("--model", required=True)
    p.add_argument("--wav", required=True)
    p.add_argument("--set", choices=["egemaps", "brute"], default=None,
                   help="feature set to extract; must match the model")
    p.add_argument("--config")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("spectrogram", help="write PGM + CSV spectrogram of a WAV")
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_spectrogram)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except VoiceStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
