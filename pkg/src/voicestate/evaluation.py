"""Leave-one-subject-out evaluation, metrics and C-grid model selection."""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import classifier
from .audio import AudioClip
from .classifier import Standardizer, class_weights, fit_standardizer
from .corpus import RecordingMeta
from .errors import (ClipTooShort, EmptyMatrix, MisalignedManifest, MissingLabel,
                     NonPositiveDays, TooFewSpeakers)
from .functionals import FeatureTable

TASKS = ("severity", "sleep", "fatigue", "anxiety")
DEFAULT_C_GRID = tuple(10.0 ** e for e in range(-7, 1))
REPORT_VERSION = 1


def severity_from_days(days: int) -> str:
    """Days in hospital -> severity stage: <=25 high, 26..50 mid, >50 low."""
    if days < 1:
        raise NonPositiveDays(f"days_in_hospital must be >= 1, got {days}")
    if days <= 25:
        return "high"
    if days <= 50:
        return "mid"
    return "low"


def task_label(meta: RecordingMeta, task: str) -> str:
    if task == "severity":
        return severity_from_days(meta.days_in_hospital)
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    label = getattr(meta, task)
    if label is None:
        raise MissingLabel(f"{meta.recording_id}: no {task} label")
    return label


# ------------------------------------------------------------------- folds

@dataclass(frozen=True)
class Fold:
    test_speaker: str
    test_indices: tuple
    train_indices: tuple


@dataclass(frozen=True)
class CvPlan:
    folds: tuple

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)


def make_loso_folds(meta: Sequence[RecordingMeta] | Sequence[str]) -> CvPlan:
    """One fold per distinct speaker, in sorted speaker order.

    Accepts manifest rows or a plain sequence of speaker ids.
    """
    speakers = [m if isinstance(m, str) else m.speaker_id for m in meta]
    distinct = sorted(set(speakers))
    if len(distinct) < 2:
        raise TooFewSpeakers(f"LOSO needs at least 2 speakers, got {len(distinct)}")
    spk = np.asarray(speakers)
    folds = []
    for s in distinct:
        test = np.flatnonzero(spk == s)
        train = np.flatnonzero(spk != s)
        folds.append(Fold(s, tuple(int(i) for i in test), tuple(int(i) for i in train)))
    return CvPlan(tuple(folds))


# ----------------------------------------------------------------- metrics

@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray  # rows true, columns predicted

    @classmethod
    def from_labels(cls, y_true, y_pred, classes=None) -> "ConfusionMatrix":
        classes = tuple(classes) if classes is not None else tuple(sorted(set(y_true) | set(y_pred)))
        pos = {c: i for i, c in enumerate(classes)}
        counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(y_true, y_pred):
            counts[pos[t], pos[p]] += 1
        return cls(classes, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


class Scores(NamedTuple):
    uar: float
    war: float
    f1: float


def _per_class(conf: ConfusionMatrix):
    c = np.asarray(conf.counts, dtype=np.float64)
    if c.sum() < 1:
        raise EmptyMatrix("confusion matrix has no instances")
    tp = np.diag(c)
    support = c.sum(axis=1)
    predicted = c.sum(axis=0)
    present = support > 0
    recall = np.divide(tp, support, out=np.zeros_like(tp), where=present)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return present, support, recall, f1


def metrics(conf: ConfusionMatrix) -> Scores:
    """UAR, WAR (accuracy) and macro F1.

    Classes with no true instances are left out of the UAR and F1 averages.
    """
    present, _, recall, f1 = _per_class(conf)
    c = np.asarray(conf.counts, dtype=np.float64)
    war = float(np.trace(c) / c.sum())
    return Scores(float(recall[present].mean()), war, float(f1[present].mean()))


def weighted_f1(conf: ConfusionMatrix) -> float:
    """Per-class F1 averaged with class support as weights."""
    present, support, _, f1 = _per_class(conf)
    return float(np.sum(f1[present] * support[present]) / support[present].sum())


def absent_classes(conf: ConfusionMatrix) -> list:
    support = np.asarray(conf.counts).sum(axis=1)
    return [c for c, n in zip(conf.classes, support) if n == 0]


# --------------------------------------------------------------- LOSO run

@dataclass(frozen=True, eq=False)
class CResult:
    C: float
    uar: float
    war: float
    f1: float
    f1_weighted: float
    confusion: ConfusionMatrix
    predictions: tuple  # (recording_id, speaker_id, true, predicted) in input order

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "uar": self.uar,
            "war": self.war,
            "f1": self.f1,
            "f1_weighted": self.f1_weighted,
            "confusion": {"classes": list(self.confusion.classes),
                          "counts": self.confusion.counts.tolist()},
            "predictions": [
                {"recording_id": r, "speaker_id": s, "true": t, "predicted": p}
                for r, s, t, p in self.predictions
            ],
        }


@dataclass(frozen=True, eq=False)
class EvalReport:
    task: str
    feature_set: str
    results: tuple  # CResult per C, in grid order
    best_C: float
    n_folds: int
    warnings: tuple = field(default_factory=tuple)

    @property
    def best(self) -> CResult:
        return next(r for r in self.results if r.C == self.best_C)

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_VERSION,
            "task": self.task,
            "feature_set": self.feature_set,
            "n_folds": self.n_folds,
            "c_grid": [r.C for r in self.results],
            "best_C": self.best_C,
            "results": [r.to_dict() for r in self.results],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def select_best(results: Sequence[CResult]) -> float:
    """Highest UAR; ties go to the smallest C."""
    return min(results, key=lambda r: (-r.uar, r.C)).C


def align(features: FeatureTable, meta: Sequence[RecordingMeta]):
    """Manifest rows that have a feature row, plus the matching feature matrix.

    Feature rows without a manifest entry are an error; manifest rows without
    features (rejected at extraction) are dropped with a warning.
    """
    by_id = {m.recording_id: m for m in meta}
    unknown = [r for r in features.recording_ids if r not in by_id]
    if unknown:
        raise MisalignedManifest(f"{len(unknown)} feature rows have no manifest entry, "
                                 f"e.g. {unknown[0]!r}")
    have = set(features.recording_ids)
    kept = [m for m in meta if m.recording_id in have]
    if not kept:
        raise MisalignedManifest("features and manifest share no recording_id")
    notes = []
    if len(kept) < len(meta):
        notes.append(f"{len(meta) - len(kept)} manifest rows have no features and were skipped")
    return kept, features.rows_for(m.recording_id for m in kept), notes


@dataclass(frozen=True, eq=False)
class FoldState:
    """Everything a fold learns from its training partition alone."""

    standardizer: Standardizer
    class_weight: dict
    X_train: np.ndarray
    y_train: tuple
    X_test: np.ndarray


def fold_state(X: np.ndarray, labels: Sequence[str], fold: Fold) -> FoldState:
    train = list(fold.train_indices)
    test = list(fold.test_indices)
    std = fit_standardizer(X[train])
    y_train = tuple(labels[i] for i in train)
    cw = class_weights(y_train) if len(set(y_train)) > 1 else {y_train[0]: 1.0}
    return FoldState(std, cw, std.transform(X[train]), y_train, std.transform(X[test]))


def run_loso(features: FeatureTable | np.ndarray, meta: Sequence[RecordingMeta], task: str,
             c_grid: Sequence[float] = DEFAULT_C_GRID, *, feature_set: str | None = None,
             labels: Sequence[str] | None = None, jobs: int = 1,
             tol: float = classifier.DEFAULT_TOL) -> EvalReport:
    """LOSO over speakers for every C; metrics on the pooled predictions.

    ``labels`` overrides the task labels derived from ``meta`` (used for
    permutation controls).
    """
    c_grid = [float(c) for c in c_grid]
    if not c_grid or any(c <= 0 for c in c_grid):
        raise ValueError("c_grid must be a non-empty list of positive values")
    notes: list[str] = []
    if isinstance(features, FeatureTable):
        meta, X, notes = align(features, meta)
        feature_set = feature_set or features.set_id or "CUSTOM"
    else:
        X = np.asarray(features, dtype=np.float64)
        if X.shape[0] != len(meta):
            raise MisalignedManifest(f"{X.shape[0]} feature rows for {len(meta)} manifest rows")
        feature_set = feature_set or "CUSTOM"
    y = list(labels) if labels is not None else [task_label(m, task) for m in meta]
    if len(y) != len(meta):
        raise MisalignedManifest("label override has the wrong length")
    classes = tuple(sorted(set(y)))
    plan = make_loso_folds(meta)

    states = []
    for fold in plan:
        st = fold_state(X, y, fold)
        missing = sorted(set(classes) - set(st.y_train))
        if missing:
            notes.append(f"fold {fold.test_speaker}: training partition lacks {missing}")
        states.append(st)

    def run_c(C: float) -> CResult:
        pred = [None] * len(y)
        for fold, st in zip(plan, states):
            if len(set(st.y_train)) < 2:
                guess = [st.y_train[0]] * len(fold.test_indices)
            else:
                model = classifier.fit(st.X_train, st.y_train, C, st.class_weight, tol=tol)
                guess = model.predict(st.X_test)
            for i, g in zip(fold.test_indices, guess):
                pred[i] = g
        conf = ConfusionMatrix.from_labels(y, pred, classes)
        uar, war, f1 = metrics(conf)
        rows = tuple((m.recording_id, m.speaker_id, t, p) for m, t, p in zip(meta, y, pred))
        return CResult(C, uar, war, f1, weighted_f1(conf), conf, rows)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_c, c_grid))
    else:
        results = [run_c(c) for c in c_grid]

    for st in states:
        if len(set(st.y_train)) < 2:
            notes.append("a fold had a single training class; it predicts that class")
            break
    for r in results:
        gone = absent_classes(r.confusion)
        if gone:
            notes.append(f"C={r.C!r}: classes without instances excluded from UAR/F1: {gone}")
    for n in notes:
        warnings.warn(n, RuntimeWarning, stacklevel=2)
    return EvalReport(task, feature_set, tuple(results), select_best(results),
                      len(plan), tuple(dict.fromkeys(notes)))


# ------------------------------------------------------------ spectrogram

SPEC_FLOOR_DB = -80.0


@dataclass(frozen=True, eq=False)
class Spectrogram:
    db: np.ndarray      # n_frames x n_bins
    freqs: np.ndarray   # Hz per bin
    times: np.ndarray   # frame start, seconds

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


def export_spectrogram(clip: AudioClip, prefix=None, frame_ms: float = 25,
                       hop_ms: float = 10) -> Spectrogram:
    """dB magnitude STFT (Hamming), floored at -80 dB re full-scale sine.

    With ``prefix`` set, also writes ``prefix.pgm`` (time left to right,
    low frequencies at the bottom) and ``prefix.csv`` (one row per frame).
    """
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("spectrogram expects a mono clip")
    sr = clip.sample_rate
    frame = int(round(frame_ms * sr / 1000))
    hop = int(round(hop_ms * sr / 1000))
    if len(x) < frame:
        raise ClipTooShort(f"need at least {frame} samples for one frame")
    n_fft = 1 << int(np.ceil(np.log2(frame)))
    frames = np.lib.stride_tricks.sliding_window_view(x, frame)[::hop]
    win = np.hamming(frame)
    mag = np.abs(np.fft.rfft(frames * win, n=n_fft, axis=1)) * 2.0 / win.sum()
    db = np.maximum(20.0 * np.log10(np.maximum(mag, 1e-12)), SPEC_FLOOR_DB)
    spec = Spectrogram(db, np.arange(n_fft // 2 + 1) * sr / n_fft,
                       np.arange(len(frames)) * hop / sr)
    if prefix is not None:
        write_spectrogram(spec, prefix)
    return spec


def spectrogram_image(spec: Spectrogram) -> np.ndarray:
    """8-bit image, rows = frequency bins (highest at top), columns = frames."""
    scaled = (spec.db - SPEC_FLOOR_DB) / -SPEC_FLOOR_DB
    img = np.clip(np.round(255.0 * scaled), 0, 255).astype(np.uint8)
    return img.T[::-1]


def write_spectrogram(spec: Spectrogram, prefix) -> tuple[Path, Path]:
    prefix = str(prefix)
    img = spectrogram_image(spec)
    pgm = Path(prefix + ".pgm")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    pgm.write_bytes(header + img.tobytes())
    csv_path = Path(prefix + ".csv")
    np.savetxt(csv_path, spec.db, delimiter=",", fmt="%.4f")
    return pgm, csv_path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)
