"""Statistical functionals: LLD contours -> fixed-length feature vectors.

Two catalogs are provided:

* ``EGEMAPS88``: 88 features over 25 descriptors, modelled on the
  minimalistic eGeMAPS layout (pitch and loudness with ten functionals,
  voice quality, spectral and cepstral means/variation, voiced/unvoiced
  spectral splits, and temporal rate features). The exact list is
  :data:`EGEMAPS_CATALOG`; bump :data:`CATALOG_VERSION` whenever it changes.
* ``BRUTE``: every contour column (deltas included) crossed with the
  twenty :data:`BRUTE_FUNCTIONALS`. With the default LLD inventory that is
  106 x 20 = 2120 features (:data:`BRUTE_DIM`).

Percentiles interpolate linearly between order statistics. Descriptors
that only exist on voiced frames (F0, jitter, shimmer, HNR and their
deltas) are summarised over voiced frames; if there are none, the
features are 0 and the vector carries a ``no_voiced_frames`` flag.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import TooFewFrames, UnknownDescriptor
from .lld import LldConfig, LldContour, is_voiced_only, lld_names

CATALOG_VERSION = "1"

EGEMAPS88 = "EGEMAPS88"
BRUTE = "BRUTE"


@dataclass(frozen=True)
class FunctionalItem:
    descriptor: str
    functional: str
    frames: str = "auto"  # auto | all | voiced | unvoiced

    def selection(self) -> str:
        if self.frames == "auto":
            return "voiced" if is_voiced_only(self.descriptor) else "all"
        return self.frames

    @property
    def name(self) -> str:
        tag = {"voiced": "_V", "unvoiced": "_UV", "all": "_A"}
        if self.frames == "auto" or self.frames == ("voiced" if is_voiced_only(self.descriptor) else "all"):
            return f"{self.descriptor}_{self.functional}"
        return f"{self.descriptor}{tag[self.frames]}_{self.functional}"


@dataclass(frozen=True)
class FunctionalSpec:
    items: tuple

    def __len__(self):
        return len(self.items)

    @property
    def names(self) -> list[str]:
        return [it.name for it in self.items]

    @classmethod
    def grid(cls, descriptors: Iterable[str], functionals: Iterable[str]) -> "FunctionalSpec":
        functionals = list(functionals)
        return cls(tuple(FunctionalItem(d, f) for d in descriptors for f in functionals))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    set_id: str
    names: tuple
    values: np.ndarray
    recording_id: str = ""
    quality_flags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


# ------------------------------------------------------------ functionals

@dataclass(frozen=True, eq=False)
class Series:
    """Selected contour values with the context some functionals need."""

    values: np.ndarray
    times: np.ndarray        # seconds
    contiguous: np.ndarray   # True where values[i], values[i+1] are adjacent frames
    hop_seconds: float
    duration: float          # seconds spanned by the whole contour


def _mean(s: Series) -> float:
    return float(np.mean(s.values))


def _std(s: Series) -> float:
    x = s.values
    return float(np.sqrt(np.mean((x - x.mean()) ** 2)))


def _std_norm(s: Series) -> float:
    m = abs(float(np.mean(s.values)))
    return _std(s) / m if m > 1e-12 else 0.0


def _moment_ratio(s: Series, order: int) -> float:
    x = s.values
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 <= 1e-24 * max(1.0, float(np.mean(x * x))):
        return 0.0
    return float(np.mean(d ** order) / m2 ** (order / 2))


def _pct(q: float) -> Callable[[Series], float]:
    return lambda s: float(np.percentile(s.values, q))


def _pct_range(a: float, b: float) -> Callable[[Series], float]:
    return lambda s: float(np.percentile(s.values, b) - np.percentile(s.values, a))


def _rel_pos(fn) -> Callable[[Series], float]:
    def f(s: Series) -> float:
        n = len(s.values)
        return float(fn(s.values)) / (n - 1) if n > 1 else 0.0
    return f


def _linreg(s: Series) -> tuple[float, float, float]:
    x, t = s.values, s.times
    if len(x) < 2:
        return 0.0, float(x[0]), 0.0
    tc = t - t.mean()
    denom = float(tc @ tc)
    slope = float(tc @ (x - x.mean())) / denom if denom > 0 else 0.0
    offset = float(x.mean() - slope * t.mean())
    resid = x - (offset + slope * t)
    return slope, offset, float(np.mean(resid * resid))


def _slopes(s: Series, rising: bool) -> np.ndarray:
    d = np.diff(s.values)[s.contiguous] / s.hop_seconds
    return d[d > 0] if rising else -d[d < 0]


def _slope_stat(rising: bool, stat) -> Callable[[Series], float]:
    def f(s: Series) -> float:
        d = _slopes(s, rising)
        return float(stat(d)) if d.size else 0.0
    return f


def _runs(mask: np.ndarray) -> tuple[list[int], list[int]]:
    """Lengths of True runs and of False runs."""
    on, off = [], []
    if mask.size == 0:
        return on, off
    edges = np.flatnonzero(np.diff(mask.astype(np.int8))) + 1
    bounds = np.concatenate(([0], edges, [mask.size]))
    for a, b in zip(bounds[:-1], bounds[1:]):
        (on if mask[a] else off).append(int(b - a))
    return on, off


VOICING_SEGMENT_THRESHOLD = 0.5


def _segment_stat(voiced: bool, stat: str) -> Callable[[Series], float]:
    def f(s: Series) -> float:
        on, off = _runs(s.values >= VOICING_SEGMENT_THRESHOLD)
        runs = np.asarray(on if voiced else off, dtype=np.float64) * s.hop_seconds
        if stat == "rate":
            return len(runs) / s.duration if s.duration > 0 else 0.0
        if runs.size == 0:
            return 0.0
        return float(runs.mean() if stat == "mean" else runs.std())
    return f


def _peaks_per_sec(s: Series) -> float:
    x = s.values
    if len(x) < 3 or s.duration <= 0:
        return 0.0
    mid = x[1:-1]
    peaks = (mid > x[:-2]) & (mid >= x[2:]) & (mid > x.mean())
    return float(np.count_nonzero(peaks)) / s.duration


def _equivalent_level(s: Series) -> float:
    return float(10.0 * np.log10(max(float(np.mean(s.values ** 2)), 1e-10)))


FUNCTIONALS: dict[str, Callable[[Series], float]] = {
    "mean": _mean,
    "stddev": _std,
    "skewness": lambda s: _moment_ratio(s, 3),
    "kurtosis": lambda s: _moment_ratio(s, 4),
    "min": lambda s: float(np.min(s.values)),
    "max": lambda s: float(np.max(s.values)),
    "range": lambda s: float(np.ptp(s.values)),
    "rel_pos_min": _rel_pos(np.argmin),
    "rel_pos_max": _rel_pos(np.argmax),
    "p01": _pct(1),
    "p20": _pct(20),
    "p50": _pct(50),
    "p80": _pct(80),
    "p99": _pct(99),
    "pctlrange_20_80": _pct_range(20, 80),
    "pctlrange_20_50": _pct_range(20, 50),
    "pctlrange_50_80": _pct_range(50, 80),
    "linreg_slope": lambda s: _linreg(s)[0],
    "linreg_offset": lambda s: _linreg(s)[1],
    "linreg_qerr": lambda s: _linreg(s)[2],
    # eGeMAPS-style extras
    "stddev_norm": _std_norm,
    "mean_rising_slope": _slope_stat(True, np.mean),
    "std_rising_slope": _slope_stat(True, np.std),
    "mean_falling_slope": _slope_stat(False, np.mean),
    "std_falling_slope": _slope_stat(False, np.std),
    "peaks_per_sec": _peaks_per_sec,
    "segments_per_sec": _segment_stat(True, "rate"),
    "mean_segment_len": _segment_stat(True, "mean"),
    "std_segment_len": _segment_stat(True, "std"),
    "mean_gap_len": _segment_stat(False, "mean"),
    "std_gap_len": _segment_stat(False, "std"),
    "equivalent_level_db": _equivalent_level,
}

BRUTE_FUNCTIONALS = (
    "mean", "stddev", "skewness", "kurtosis", "min", "max", "range",
    "rel_pos_min", "rel_pos_max", "p01", "p20", "p50", "p80", "p99",
    "pctlrange_20_80", "pctlrange_20_50", "pctlrange_50_80",
    "linreg_slope", "linreg_offset", "linreg_qerr",
)


# ---------------------------------------------------------------- catalogs

_TEN = ("mean", "stddev_norm", "p20", "p50", "p80", "pctlrange_20_80",
        "mean_rising_slope", "std_rising_slope", "mean_falling_slope", "std_falling_slope")
_TWO = ("mean", "stddev_norm")


def _egemaps_items() -> tuple:
    items = []
    for d in ("f0", "loudness"):
        items += [FunctionalItem(d, f) for f in _TEN]
    for d in ("jitter_local", "shimmer_local", "hnr_db"):
        items += [FunctionalItem(d, f) for f in _TWO]
    for d in [f"mfcc_{i:02d}" for i in range(1, 13)]:
        items += [FunctionalItem(d, f) for f in _TWO]
    for d in ("spec_flux", "spec_centroid", "spec_slope", "spec_rolloff85", "spec_sharpness", "zcr"):
        items += [FunctionalItem(d, f) for f in _TWO]
    for d in ("spec_flux", "spec_slope", "spec_centroid", "mfcc_01", "mfcc_02", "mfcc_03", "mfcc_04"):
        items += [FunctionalItem(d, f, "voiced") for f in _TWO]
    for d in ("spec_flux", "spec_slope", "spec_centroid", "spec_rolloff85"):
        items.append(FunctionalItem(d, "mean", "unvoiced"))
    items.append(FunctionalItem("loudness", "peaks_per_sec"))
    items += [FunctionalItem("voicing_prob", f) for f in
              ("segments_per_sec", "mean_segment_len", "std_segment_len",
               "mean_gap_len", "std_gap_len", "mean")]
    items.append(FunctionalItem("rms_energy", "equivalent_level_db"))
    return tuple(items)


EGEMAPS_CATALOG = FunctionalSpec(_egemaps_items())
EGEMAPS_DESCRIPTORS = tuple(dict.fromkeys(it.descriptor for it in EGEMAPS_CATALOG.items))
BRUTE_COLUMNS = tuple(lld_names(LldConfig(deltas=True)))
BRUTE_CATALOG = FunctionalSpec.grid(BRUTE_COLUMNS, BRUTE_FUNCTIONALS)
BRUTE_DIM = len(BRUTE_CATALOG)

assert len(EGEMAPS_CATALOG) == 88
assert len(EGEMAPS_DESCRIPTORS) == 25


def feature_names(set_id: str) -> list[str]:
    if set_id == EGEMAPS88:
        return EGEMAPS_CATALOG.names
    if set_id == BRUTE:
        return BRUTE_CATALOG.names
    raise ValueError(f"unknown feature set {set_id!r}")


def feature_set_of(names: Iterable[str]) -> str | None:
    """Which built-in catalog a header matches, or None."""
    names = list(names)
    for set_id in (EGEMAPS88, BRUTE):
        if names == feature_names(set_id):
            return set_id
    return None


# -------------------------------------------------------------- operations

def _series(contour: LldContour, col: int, selection: str) -> Series:
    n = contour.n_frames
    hop_s = contour.grid.hop_seconds
    if selection == "voiced":
        mask = contour.voiced
    elif selection == "unvoiced":
        mask = ~contour.voiced
    elif selection == "all":
        mask = np.ones(n, dtype=bool)
    else:
        raise ValueError(f"unknown frame selection {selection!r}")
    idx = np.flatnonzero(mask)
    return Series(
        values=contour.values[idx, col],
        times=idx * hop_s,
        contiguous=np.diff(idx) == 1,
        hop_seconds=hop_s,
        duration=n * hop_s,
    )


def apply_functionals(contour: LldContour, spec: FunctionalSpec, set_id: str = "CUSTOM",
                      recording_id: str = "") -> FeatureVector:
    """One value per (descriptor, functional) item of ``spec``."""
    if contour.n_frames < 2:
        raise TooFewFrames(f"need at least 2 frames, got {contour.n_frames}")
    positions = {n: i for i, n in enumerate(contour.names)}
    missing = sorted({it.descriptor for it in spec.items} - set(positions))
    if missing:
        raise UnknownDescriptor(f"descriptors absent from contour: {missing}")

    values = np.zeros(len(spec.items))
    flags = set()
    cache: dict[tuple[str, str], Series] = {}
    for k, it in enumerate(spec.items):
        fn = FUNCTIONALS.get(it.functional)
        if fn is None:
            raise ValueError(f"unknown functional {it.functional!r}")
        sel = it.selection()
        key = (it.descriptor, sel)
        if key not in cache:
            cache[key] = _series(contour, positions[it.descriptor], sel)
        s = cache[key]
        if s.values.size == 0:
            flags.add(f"no_{sel}_frames")
            continue
        values[k] = fn(s)
    if not np.all(np.isfinite(values)):
        flags.add("non_finite_replaced")
        values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
    return FeatureVector(set_id, tuple(spec.names), values, recording_id, tuple(sorted(flags)))


def egemaps_vector(contour: LldContour, recording_id: str = "") -> FeatureVector:
    return apply_functionals(contour, EGEMAPS_CATALOG, EGEMAPS88, recording_id)


def brute_force_vector(contour: LldContour, recording_id: str = "") -> FeatureVector:
    """Every contour column x :data:`BRUTE_FUNCTIONALS`; needs a contour with deltas."""
    return apply_functionals(contour, BRUTE_CATALOG, BRUTE, recording_id)


def vector_for(set_id: str, contour: LldContour, recording_id: str = "") -> FeatureVector:
    if set_id == EGEMAPS88:
        return egemaps_vector(contour, recording_id)
    if set_id == BRUTE:
        return brute_force_vector(contour, recording_id)
    raise ValueError(f"unknown feature set {set_id!r}")


# ------------------------------------------------------------- CSV format

@dataclass(frozen=True, eq=False)
class FeatureTable:
    recording_ids: tuple
    names: tuple
    values: np.ndarray  # n_recordings x n_features

    @property
    def set_id(self) -> str | None:
        return feature_set_of(self.names)

    def rows_for(self, ids: Iterable[str]) -> np.ndarray:
        pos = {r: i for i, r in enumerate(self.recording_ids)}
        return self.values[[pos[r] for r in ids]]


def write_feature_csv(path, vectors: Iterable[FeatureVector]) -> None:
    vectors = list(vectors)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        names = list(vectors[0].names) if vectors else []
        w.writerow(["recording_id"] + names)
        for v in vectors:
            if list(v.names) != names:
                raise ValueError("all vectors in one file must share a feature layout")
            w.writerow([v.recording_id] + [repr(float(x)) for x in v.values])


def read_feature_csv(path) -> FeatureTable:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["recording_id"]:
        raise ValueError(f"{path}: header must start with recording_id")
    names = tuple(rows[0][1:])
    ids, data = [], []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(names) + 1:
            raise ValueError(f"{path}:{line}: expected {len(names) + 1} fields, got {len(row)}")
        ids.append(row[0])
        data.append([float(v) for v in row[1:]])
    if len(set(ids)) != len(ids):
        raise ValueError(f"{path}: duplicate recording_id")
    values = np.array(data, dtype=np.float64).reshape(len(ids), len(names))
    return FeatureTable(tuple(ids), names, values)
