"""Recording manifests and a deterministic synthetic corpus.

Manifest CSV header::

    recording_id,path,speaker_id,sentence_id,days_in_hospital,sleep,fatigue,anxiety,gender,age,height,weight

The four demographic columns are optional (column or value may be
missing). Self-report levels are ``low``, ``mid`` or ``high``
(case-insensitive on input); an empty level means "not reported".
Relative paths are resolved against the manifest's directory.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio import AudioClip, write_wav
from .errors import BadLevel, BadSentenceId, DuplicateId, IoFailure, ManifestError, MissingColumn

LEVELS = ("low", "mid", "high")
REQUIRED_COLUMNS = ("recording_id", "path", "speaker_id", "sentence_id",
                    "days_in_hospital", "sleep", "fatigue", "anxiety")
OPTIONAL_COLUMNS = ("gender", "age", "height", "weight")
MANIFEST_COLUMNS = REQUIRED_COLUMNS + OPTIONAL_COLUMNS


@dataclass(frozen=True)
class RecordingMeta:
    recording_id: str
    path: str
    speaker_id: str
    sentence_id: int
    days_in_hospital: int
    sleep: str | None = None
    fatigue: str | None = None
    anxiety: str | None = None
    gender: str | None = None
    age: int | None = None
    height: float | None = None
    weight: float | None = None

    def resolve(self, base_dir) -> Path:
        p = Path(self.path)
        return p if p.is_absolute() else Path(base_dir) / p


def _level(value: str, column: str, line: int) -> str | None:
    v = value.strip().lower()
    if not v:
        return None
    if v not in LEVELS:
        raise BadLevel(f"line {line}: {column}={value!r} is not one of {LEVELS}")
    return v


def _optional(value: str, kind, column: str, line: int):
    v = value.strip()
    if not v:
        return None
    try:
        return kind(v)
    except ValueError:
        raise ManifestError(f"line {line}: {column}={value!r} is not a valid {kind.__name__}") from None


def parse_manifest(path) -> list[RecordingMeta]:
    """Read and validate a manifest CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
        rows = list(reader)

    out, seen = [], set()
    for line, row in enumerate(rows, start=2):
        rid = row["recording_id"].strip()
        if not rid:
            raise ManifestError(f"line {line}: empty recording_id")
        if rid in seen:
            raise DuplicateId(f"line {line}: duplicate recording_id {rid!r}")
        seen.add(rid)
        try:
            sentence = int(row["sentence_id"])
        except ValueError:
            raise BadSentenceId(f"line {line}: sentence_id={row['sentence_id']!r}") from None
        if not 1 <= sentence <= 5:
            raise BadSentenceId(f"line {line}: sentence_id={sentence} outside 1..5")
        try:
            days = int(row["days_in_hospital"])
        except ValueError:
            raise ManifestError(f"line {line}: days_in_hospital={row['days_in_hospital']!r}") from None
        if days < 1:
            raise ManifestError(f"line {line}: days_in_hospital must be positive")
        gender = (row.get("gender") or "").strip() or None
        out.append(RecordingMeta(
            recording_id=rid,
            path=row["path"],
            speaker_id=row["speaker_id"].strip(),
            sentence_id=sentence,
            days_in_hospital=days,
            sleep=_level(row["sleep"], "sleep", line),
            fatigue=_level(row["fatigue"], "fatigue", line),
            anxiety=_level(row["anxiety"], "anxiety", line),
            gender=gender,
            age=_optional(row.get("age") or "", int, "age", line),
            height=_optional(row.get("height") or "", float, "height", line),
            weight=_optional(row.get("weight") or "", float, "weight", line),
        ))
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_manifest(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for r in rows:
            d = asdict(r)
            w.writerow([_cell(d[c]) for c in MANIFEST_COLUMNS])


# ------------------------------------------------------------ synthesis

@dataclass(frozen=True)
class ClassProfile:
    name: str
    f0_range: tuple = (80.0, 120.0)        # Hz
    amp_range: tuple = (0.1, 0.2)          # peak amplitude
    pause_rate: float = 1.0                # pauses per second of phrase
    noise_floor_db: float = -55.0          # dBFS RMS
    days_range: tuple = (1, 25)
    sleep: str = "mid"
    fatigue: str = "mid"
    anxiety: str = "mid"


DEFAULT_PROFILES = (
    ClassProfile("high", (80.0, 120.0), (0.10, 0.20), 1.6, -50.0, (1, 25), "low", "high", "high"),
    ClassProfile("mid", (150.0, 190.0), (0.20, 0.35), 0.8, -56.0, (26, 50), "mid", "mid", "mid"),
    ClassProfile("low", (220.0, 280.0), (0.35, 0.50), 0.3, -62.0, (51, 80), "high", "low", "low"),
)


@dataclass(frozen=True)
class SynthSpec:
    n_speakers: int = 10                   # per class
    clips_per_speaker: int = 5
    classes: tuple = DEFAULT_PROFILES
    seed: int = 0
    sample_rate: int = 16000
    phrase_seconds: tuple = (1.4, 2.2)
    edge_silence_seconds: tuple = (0.15, 0.35)

    def __post_init__(self):
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ValueError("class profile names must be unique")
        keys = [tuple(asdict(c).items())[1:] for c in self.classes]
        if len(set(keys)) != len(keys):
            raise ValueError("class profiles must be pairwise distinct")
        if self.n_speakers < 1 or self.clips_per_speaker < 1:
            raise ValueError("need at least one speaker and one clip per class")

    @classmethod
    def from_mapping(cls, data: dict) -> "SynthSpec":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown synth spec keys: {sorted(unknown)}")
        if "classes" in data:
            data["classes"] = tuple(
                ClassProfile(**{k: tuple(v) if isinstance(v, list) else v for k, v in c.items()})
                for c in data["classes"])
        for k in ("phrase_seconds", "edge_silence_seconds"):
            if k in data:
                data[k] = tuple(data[k])
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "SynthSpec":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            return cls.from_mapping(tomllib.loads(text))
        return cls.from_mapping(json.loads(text))

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))


# rough vowel formants (Hz) and bandwidths
_VOWELS = {
    "a": ((730, 90), (1090, 110), (2440, 170)),
    "i": ((270, 60), (2290, 100), (3010, 180)),
    "u": ((300, 70), (870, 90), (2240, 170)),
    "e": ((530, 70), (1840, 100), (2480, 160)),
    "o": ((570, 80), (840, 90), (2410, 170)),
}


def _resonator(x: np.ndarray, freq: float, bw: float, sr: int) -> np.ndarray:
    r = np.exp(-np.pi * bw / sr)
    theta = 2 * np.pi * freq / sr
    a = [1.0, -2 * r * np.cos(theta), r * r]
    return lfilter([1.0 - r], a, x)


def _syllable(rng, f0_start: float, f0_end: float, seconds: float, jitter: float,
              sr: int) -> np.ndarray:
    n = int(seconds * sr)
    f0 = np.linspace(f0_start, f0_end, n) * (1 + 0.01 * np.sin(2 * np.pi * 5 * np.arange(n) / sr))
    src = np.zeros(n)
    t = 0.0
    while True:
        k = int(t)
        if k >= n:
            break
        src[k] = 1.0
        t += sr / f0[k] * (1 + jitter * rng.standard_normal())
    src = lfilter([1.0], [1.0, -0.95], src - src.mean())
    formants = _VOWELS[rng.choice(sorted(_VOWELS))]
    y = src
    for f, bw in formants:
        y = _resonator(y, f, bw, sr)
    ramp = min(int(0.02 * sr), n // 2)
    env = np.ones(n)
    if ramp:
        edge = 0.5 - 0.5 * np.cos(np.linspace(0, np.pi, ramp))
        env[:ramp], env[-ramp:] = edge, edge[::-1]
    y = y * env
    peak = np.max(np.abs(y))
    return y / peak if peak > 0 else y


def synthesize_clip(profile: ClassProfile, speaker_f0: float, amplitude: float,
                    rng: np.random.Generator, spec: SynthSpec) -> np.ndarray:
    """Pulse-train 'vowel' phrase with pauses, edge silence and a noise floor."""
    sr = spec.sample_rate
    lo, hi = profile.f0_range
    center = float(np.clip(speaker_f0 * rng.uniform(0.98, 1.02), lo * 1.04, hi / 1.04))
    phrase = rng.uniform(*spec.phrase_seconds)
    parts, elapsed = [], 0.0
    while elapsed < phrase:
        dur = rng.uniform(0.15, 0.35)
        pos = elapsed / phrase
        f_a = center * (1.04 - 0.08 * pos)
        f_b = center * (1.04 - 0.08 * min(1.0, (elapsed + dur) / phrase))
        parts.append(_syllable(rng, f_a, f_b, dur, 0.004, sr) * rng.uniform(0.7, 1.0))
        elapsed += dur
        if elapsed < phrase and rng.random() < profile.pause_rate * dur:
            gap = rng.uniform(0.08, 0.2)
            parts.append(np.zeros(int(gap * sr)))
            elapsed += gap
    voice = np.concatenate(parts) * amplitude
    lead = np.zeros(int(rng.uniform(*spec.edge_silence_seconds) * sr))
    tail = np.zeros(int(rng.uniform(*spec.edge_silence_seconds) * sr))
    x = np.concatenate([lead, voice, tail])
    noise_rms = 10.0 ** (profile.noise_floor_db / 20.0)
    x = x + noise_rms * rng.standard_normal(len(x))
    return np.clip(x, -1.0, 1.0)


def parse_synth_filename(name: str) -> dict:
    """Recover ``recording_id`` and the generating class from a synthetic file name."""
    stem = Path(name).stem
    rid, _, cls = stem.rpartition("__")
    return {"recording_id": rid, "class": cls}


def generate_corpus(spec: SynthSpec, out_dir) -> Path:
    """Write WAVs under ``out_dir/wav`` and ``out_dir/manifest.csv``; returns the manifest path.

    Each file gets an independent random stream derived from
    (seed, class, speaker, clip), so output is byte-identical per seed.
    """
    out_dir = Path(out_dir)
    try:
        (out_dir / "wav").mkdir(parents=True, exist_ok=True)
        rows = []
        spk = 0
        for ci, profile in enumerate(spec.classes):
            for si in range(spec.n_speakers):
                spk += 1
                srng = np.random.default_rng(np.random.SeedSequence([spec.seed, ci, si]))
                speaker_f0 = srng.uniform(*profile.f0_range)
                amp_lo, amp_hi = profile.amp_range
                speaker_amp = srng.uniform(amp_lo, amp_hi)
                days = int(srng.integers(profile.days_range[0], profile.days_range[1] + 1))
                gender = "female" if srng.random() < 0.4 else "male"
                age = int(np.clip(round(srng.normal(63, 10)), 18, 95))
                has_body = srng.random() > 0.25
                height = round(float(srng.normal(160 if gender == "female" else 173, 9)), 1)
                weight = round(float(srng.normal(60 if gender == "female" else 71, 13)), 1)
                speaker_id = f"spk{spk:03d}"
                for k in range(spec.clips_per_speaker):
                    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, ci, si, k]))
                    amp = float(np.clip(speaker_amp * rng.uniform(0.9, 1.1), amp_lo, amp_hi))
                    x = synthesize_clip(profile, speaker_f0, amp, rng, spec)
                    sentence = k % 5 + 1
                    rid = f"{speaker_id}_s{sentence}_c{k:02d}"
                    rel = f"wav/{rid}__{profile.name}.wav"
                    write_wav(out_dir / rel, AudioClip.mono(x, spec.sample_rate))
                    rows.append(RecordingMeta(
                        rid, rel, speaker_id, sentence, days,
                        profile.sleep, profile.fatigue, profile.anxiety, gender, age,
                        height if has_body else None, weight if has_body else None))
        manifest = out_dir / "manifest.csv"
        write_manifest(manifest, rows)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return manifest
