"""Frame-level low-level descriptors (LLDs).

All descriptors share one frame grid (25 ms Hamming frames, 10 ms hop by
default). Pitch analysis uses longer Gaussian windows centred on the same
frame centres, so every column lines up frame for frame.

Column inventory (``deltas=False``), in order::

    band_energy_01..26   mel-scale auditory band energies
    spec_centroid        Hz, magnitude-weighted
    spec_slope           dB/kHz, least-squares fit of the dB power spectrum
    spec_flux            squared change of the L1-normalised magnitude spectrum
    spec_rolloff85       Hz below which 85 % of power lies
    spec_sharpness       Zwicker-style weighted Bark centroid of band loudness
    rms_energy           frame RMS (unwindowed)
    loudness             sum of band energies ** 0.3
    zcr                  sign changes per sample
    mfcc_01..14          DCT-II of log band energies, c0 dropped
    f0                   Hz, 0 when unvoiced
    voicing_prob         normalised autocorrelation at the pitch lag
    jitter_local         mean |dT| / mean T over the frame's pitch periods
    shimmer_local        mean |dA| / mean A over the same periods
    hnr_db               10 log10(r / (1 - r)) at the pitch lag

With deltas enabled, ``<name>_de`` columns follow in the same order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.fft import dct

from .audio import AudioClip
from .errors import ClipTooShort, GridMismatch

LOG_FLOOR = 1e-10
SILENCE_POWER = 1e-10
# only guards exact zeros; anything louder must stay gain-invariant in the cepstrum
MEL_LOG_FLOOR = 1e-20

VOICED_ONLY = frozenset({"f0", "jitter_local", "shimmer_local", "hnr_db"})

# SHS parameters
SHS_HARMONICS = 15
SHS_COMPRESSION = 0.84
SHS_POINTS_PER_OCTAVE = 48
SHS_MAX_FREQ = 5000.0
SHS_NEAR_TIE = 0.95


@dataclass(frozen=True)
class LldConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    f0_frame_ms: float = 60.0
    fmin: float = 55.0
    fmax: float = 500.0
    n_bands: int = 26
    band_fmin: float = 20.0
    band_fmax: float = 8000.0
    n_coeffs: int = 14
    voicing_threshold: float = 0.5
    deltas: bool = False
    energy_floor_db: float = -45.0

    @classmethod
    def from_mapping(cls, data: dict) -> "LldConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"unknown LLD config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "LldConfig":
        """Load from a ``.toml`` or ``.json`` file; a ``[lld]`` table is used if present."""
        path = Path(path)
        if path.suffix.lower() == ".json":
            data = json.loads(path.read_text())
        else:
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(path.read_text())
        return cls.from_mapping(data.get("lld", data))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FrameGrid:
    frame_len_ms: float
    hop_ms: float
    n_frames: int
    window: str = "hamming"
    sample_rate: int = 16000

    @property
    def frame_len(self) -> int:
        return int(round(self.frame_len_ms * self.sample_rate / 1000))

    @property
    def hop(self) -> int:
        return int(round(self.hop_ms * self.sample_rate / 1000))

    @property
    def hop_seconds(self) -> float:
        return self.hop / self.sample_rate

    def centers(self) -> np.ndarray:
        """Frame centre positions in samples."""
        return np.arange(self.n_frames) * self.hop + self.frame_len / 2.0

    @classmethod
    def for_clip(cls, n_samples: int, sample_rate: int, frame_ms: float = 25.0,
                 hop_ms: float = 10.0, window: str = "hamming") -> "FrameGrid":
        frame_len = int(round(frame_ms * sample_rate / 1000))
        hop = int(round(hop_ms * sample_rate / 1000))
        if n_samples < frame_len:
            raise ClipTooShort(
                f"{n_samples} samples is shorter than one {frame_ms} ms frame")
        n_frames = (n_samples - frame_len) // hop + 1
        return cls(frame_ms, hop_ms, n_frames, window, sample_rate)


@dataclass(frozen=True, eq=False)
class LldContour:
    grid: FrameGrid
    names: tuple
    values: np.ndarray
    voiced: np.ndarray
    config: LldConfig = field(default_factory=LldConfig)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("descriptor names must be unique")
        if self.values.shape != (self.grid.n_frames, len(self.names)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{self.grid.n_frames} frames x {len(self.names)} names")

    @property
    def n_frames(self) -> int:
        return self.grid.n_frames

    def index(self, name: str) -> int:
        return self.names.index(name)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def select(self, names) -> "LldContour":
        """Return a contour restricted (and reordered) to ``names``."""
        idx = [self.names.index(n) for n in names]
        return LldContour(self.grid, tuple(names), self.values[:, idx],
                          self.voiced, self.config)


def is_voiced_only(name: str) -> bool:
    return name.removesuffix("_de") in VOICED_ONLY


# ---------------------------------------------------------------- framing

def _mono(clip: AudioClip) -> np.ndarray:
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("LLD extraction expects a mono clip; call normalize() first")
    return x


def _grid(clip: AudioClip, config: LldConfig) -> FrameGrid:
    return FrameGrid.for_clip(clip.n_samples, clip.sample_rate,
                              config.frame_ms, config.hop_ms, "hamming")


def _frames(x: np.ndarray, grid: FrameGrid) -> np.ndarray:
    return np.lib.stride_tricks.sliding_window_view(x, grid.frame_len)[::grid.hop][:grid.n_frames]


def _centered_frames(x: np.ndarray, grid: FrameGrid, length: int) -> np.ndarray:
    """Frames of ``length`` samples centred on the grid's frame centres (zero padded)."""
    left = (length - grid.frame_len) // 2
    need = (grid.n_frames - 1) * grid.hop + length
    padded = np.zeros(max(need, left + len(x)))
    padded[left:left + len(x)] = x
    return np.lib.stride_tricks.sliding_window_view(padded, length)[::grid.hop][:grid.n_frames]


# ----------------------------------------------------- spectral machinery

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def hz_to_bark(f):
    f = np.asarray(f, dtype=np.float64)
    return 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)


@lru_cache(maxsize=16)
def mel_filterbank(n_bands: int, n_fft: int, sample_rate: int,
                   fmin: float = 20.0, fmax: float = 8000.0) -> np.ndarray:
    """Triangular mel filters, shape ``(n_bands, n_fft // 2 + 1)``."""
    fmax = min(fmax, sample_rate / 2.0)
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_bands + 2))
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    fb = np.zeros((n_bands, len(freqs)))
    for b in range(n_bands):
        lo, c, hi = edges[b], edges[b + 1], edges[b + 2]
        rise = (freqs - lo) / (c - lo)
        fall = (hi - freqs) / (hi - c)
        fb[b] = np.maximum(0.0, np.minimum(rise, fall))
        if not fb[b].any():
            # narrow low filters can fall between bins; take the nearest bin
            fb[b, int(np.argmin(np.abs(freqs - c)))] = 1.0
    fb.setflags(write=False)
    return fb


def band_centers(n_bands: int, sample_rate: int, fmin: float = 20.0,
                 fmax: float = 8000.0) -> np.ndarray:
    fmax = min(fmax, sample_rate / 2.0)
    return mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_bands + 2))[1:-1]


def _n_fft(frame_len: int) -> int:
    return 1 << int(np.ceil(np.log2(frame_len)))


@dataclass(frozen=True, eq=False)
class _Spectra:
    freqs: np.ndarray
    magnitude: np.ndarray  # n_frames x bins, scaled so a full-scale sine peaks near 0.5
    bands: np.ndarray      # n_frames x n_bands


def _spectra(clip: AudioClip, config: LldConfig) -> tuple[FrameGrid, _Spectra]:
    x = _mono(clip)
    grid = _grid(clip, config)
    frames = _frames(x, grid)
    win = np.hamming(grid.frame_len)
    n_fft = _n_fft(grid.frame_len)
    mag = np.abs(np.fft.rfft(frames * win, n=n_fft, axis=1)) / win.sum()
    fb = mel_filterbank(config.n_bands, n_fft, clip.sample_rate,
                        config.band_fmin, config.band_fmax)
    bands = (mag * mag) @ fb.T
    freqs = np.arange(n_fft // 2 + 1) * clip.sample_rate / n_fft
    return grid, _Spectra(freqs, mag, bands)


def band_names(n_bands: int = 26) -> list[str]:
    return [f"band_energy_{i:02d}" for i in range(1, n_bands + 1)]


def mfcc_names(n_coeffs: int = 14) -> list[str]:
    return [f"mfcc_{i:02d}" for i in range(1, n_coeffs + 1)]


SPECTRAL_SHAPE = ["spec_centroid", "spec_slope", "spec_flux", "spec_rolloff85", "spec_sharpness"]
ENERGY = ["rms_energy", "loudness", "zcr"]
PITCH = ["f0", "voicing_prob"]
VOICE_QUALITY = ["jitter_local", "shimmer_local", "hnr_db"]


def lld_names(config: LldConfig = LldConfig()) -> list[str]:
    base = (band_names(config.n_bands) + SPECTRAL_SHAPE + ENERGY
            + mfcc_names(config.n_coeffs) + PITCH + VOICE_QUALITY)
    if config.deltas:
        base = base + [f"{n}_de" for n in base]
    return base


# ------------------------------------------------------------- operations

def compute_spectral(clip: AudioClip, n_bands: int = 26,
                     config: LldConfig | None = None) -> dict[str, np.ndarray]:
    """Auditory band energies plus spectral shape descriptors."""
    config = config or LldConfig(n_bands=n_bands)
    if config.n_bands != n_bands:
        config = LldConfig(**{**config.to_dict(), "n_bands": n_bands})
    _, sp = _spectra(clip, config)
    return _spectral_columns(sp, clip.sample_rate, config)


def _spectral_columns(sp: _Spectra, sample_rate: int, config: LldConfig) -> dict:
    mag, bands, freqs = sp.magnitude, sp.bands, sp.freqs
    power = mag * mag
    out = {name: bands[:, i] for i, name in enumerate(band_names(config.n_bands))}

    mag_sum = mag.sum(axis=1)
    live = mag_sum > 0
    safe_sum = np.where(live, mag_sum, 1.0)
    out["spec_centroid"] = np.where(live, (mag @ freqs) / safe_sum, 0.0)

    db = 10.0 * np.log10(np.maximum(power, LOG_FLOOR))
    fk = freqs / 1000.0
    fc = fk - fk.mean()
    slope = (db - db.mean(axis=1, keepdims=True)) @ fc / (fc @ fc)
    out["spec_slope"] = np.where(live, slope, 0.0)

    norm = mag / safe_sum[:, None]
    diff = np.diff(norm, axis=0)
    out["spec_flux"] = np.concatenate(([0.0], np.sum(diff * diff, axis=1)))

    cum = np.cumsum(power, axis=1)
    total = cum[:, -1]
    has_power = total > 0
    k = np.argmax(cum >= 0.85 * total[:, None], axis=1)
    out["spec_rolloff85"] = np.where(has_power, freqs[k], 0.0)

    z = hz_to_bark(band_centers(config.n_bands, sample_rate, config.band_fmin, config.band_fmax))
    g = np.where(z < 15.0, 1.0, 0.066 * np.exp(0.171 * z))
    specific = bands ** 0.3
    spec_sum = specific.sum(axis=1)
    ok = spec_sum > 0
    out["spec_sharpness"] = np.where(
        ok, 0.11 * (specific @ (z * g)) / np.where(ok, spec_sum, 1.0), 0.0)
    return out


def compute_energy_prosodic(clip: AudioClip,
                            config: LldConfig | None = None) -> dict[str, np.ndarray]:
    """RMS energy, loudness proxy and zero-crossing rate per frame."""
    config = config or LldConfig()
    x = _mono(clip)
    grid, sp = _spectra(clip, config)
    return _energy_columns(x, grid, sp)


def _energy_columns(x: np.ndarray, grid: FrameGrid, sp: _Spectra) -> dict:
    frames = _frames(x, grid)
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    crossings = np.sum(frames[:, 1:] * frames[:, :-1] < 0, axis=1)
    zcr = crossings / max(grid.frame_len - 1, 1)
    loudness = np.sum(sp.bands ** 0.3, axis=1)
    return {"rms_energy": rms, "loudness": loudness, "zcr": zcr}


def compute_mfcc(clip: AudioClip, n_coeffs: int = 14,
                 config: LldConfig | None = None) -> dict[str, np.ndarray]:
    """MFCC 1..n_coeffs from the shared mel filterbank."""
    config = config or LldConfig(n_coeffs=n_coeffs)
    _, sp = _spectra(clip, config)
    return _mfcc_columns(sp, n_coeffs)


def _mfcc_columns(sp: _Spectra, n_coeffs: int) -> dict:
    logb = np.log(np.maximum(sp.bands, MEL_LOG_FLOOR))
    cep = dct(logb, type=2, norm="ortho", axis=1)
    if n_coeffs + 1 > cep.shape[1]:
        raise ValueError("more cepstral coefficients requested than bands available")
    return {name: cep[:, i + 1] for i, name in enumerate(mfcc_names(n_coeffs))}


# ------------------------------------------------------------------ pitch

def _gauss_window(n: int) -> np.ndarray:
    t = np.arange(n) - (n - 1) / 2.0
    return np.exp(-0.5 * (t / (0.25 * n)) ** 2)


@lru_cache(maxsize=8)
def _shs_setup(n_fft: int, sample_rate: int, fmin: float, fmax: float):
    """Candidate log-frequency grid and the matrix summing compressed harmonics."""
    n_oct = np.log2(fmax / fmin)
    n_cand = int(np.ceil(n_oct * SHS_POINTS_PER_OCTAVE)) + 1
    cand = fmin * 2.0 ** (np.arange(n_cand) / SHS_POINTS_PER_OCTAVE)
    cand = cand[cand <= fmax * (1 + 1e-9)]
    bin_hz = sample_rate / n_fft
    n_bins = n_fft // 2 + 1
    top = min(SHS_MAX_FREQ, sample_rate / 2.0)
    m = np.zeros((n_bins, len(cand)))
    for j, f in enumerate(cand):
        for h in range(1, SHS_HARMONICS + 1):
            fh = h * f
            if fh > top:
                break
            pos = fh / bin_hz
            i0 = int(np.floor(pos))
            frac = pos - i0
            wgt = SHS_COMPRESSION ** (h - 1)
            m[i0, j] += wgt * (1 - frac)
            if i0 + 1 < n_bins:
                m[i0 + 1, j] += wgt * frac
    return cand, m


def _normalized_autocorr(frames: np.ndarray, win: np.ndarray) -> np.ndarray:
    """Window-corrected normalised autocorrelation per frame.

    r(tau) = [r_x(tau) / r_x(0)] / [r_w(tau) / r_w(0)], so a periodic
    signal reaches ~1 at its period despite the window taper.
    """
    n = frames.shape[1]
    n_fft = _n_fft(2 * n)
    xw = (frames - frames.mean(axis=1, keepdims=True)) * win
    spec = np.fft.rfft(xw, n=n_fft, axis=1)
    rx = np.fft.irfft(spec * np.conj(spec), n=n_fft, axis=1)[:, :n]
    ws = np.fft.rfft(win, n=n_fft)
    rw = np.fft.irfft(ws * np.conj(ws), n=n_fft)[:n]
    r0 = rx[:, :1]
    safe_r0 = np.where(r0 > 0, r0, 1.0)
    return np.where(r0 > 0, rx / safe_r0, 0.0) / (rw / rw[0])


def _peak_in(r: np.ndarray, lo: int, hi: int) -> tuple[float, float]:
    """Max of ``r[lo:hi+1]`` with parabolic refinement; returns (lag, value)."""
    lo = max(lo, 1)
    hi = min(hi, len(r) - 2)
    if hi < lo:
        return 0.0, 0.0
    k = lo + int(np.argmax(r[lo:hi + 1]))
    a, b, c = r[k - 1], r[k], r[k + 1]
    denom = a - 2 * b + c
    if denom < 0:
        off = 0.5 * (a - c) / denom
        off = float(np.clip(off, -0.5, 0.5))
        return k + off, float(b - 0.25 * (a - c) * off)
    return float(k), float(b)


def _f0_frames(x: np.ndarray, grid: FrameGrid, config: LldConfig) -> np.ndarray:
    length = int(round(config.f0_frame_ms * grid.sample_rate / 1000))
    return _centered_frames(x, grid, max(length, grid.frame_len))


def compute_f0_voicing(clip: AudioClip, fmin: float = 55.0, fmax: float = 500.0,
                       config: LldConfig | None = None) -> dict[str, np.ndarray]:
    """F0 by subharmonic summation, voicing from the autocorrelation at the pitch lag.

    Near-tied SHS peaks (within 5 % of the best) are resolved by the higher
    voicing strength, then by the lower frequency.
    """
    config = config or LldConfig(fmin=fmin, fmax=fmax)
    if (config.fmin, config.fmax) != (fmin, fmax):
        config = LldConfig(**{**config.to_dict(), "fmin": fmin, "fmax": fmax})
    x = _mono(clip)
    frame_len = int(round(config.frame_ms * clip.sample_rate / 1000))
    if len(x) < 3 * frame_len:
        raise ClipTooShort(f"pitch analysis needs at least {3 * frame_len} samples")
    grid = _grid(clip, config)
    return _pitch_columns(x, grid, config)


def _pitch_columns(x: np.ndarray, grid: FrameGrid, config: LldConfig) -> dict:
    sr = grid.sample_rate
    frames = _f0_frames(x, grid, config)
    n = frames.shape[1]
    win = _gauss_window(n)
    n_fft = max(4096, _n_fft(n))
    cand, shs_matrix = _shs_setup(n_fft, sr, float(config.fmin), float(config.fmax))

    centered = frames - frames.mean(axis=1, keepdims=True)
    power = np.mean(centered * centered, axis=1)
    live = power > SILENCE_POWER

    f0 = np.zeros(grid.n_frames)
    vp = np.zeros(grid.n_frames)
    idx = np.flatnonzero(live)
    if idx.size == 0:
        return {"f0": f0, "voicing_prob": vp}

    mag = np.abs(np.fft.rfft(centered[idx] * win, n=n_fft, axis=1))
    shs = mag @ shs_matrix
    acf = _normalized_autocorr(frames[idx], win)

    for row, k in enumerate(idx):
        f, v = _pick_pitch(shs[row], acf[row], cand, sr, config)
        vp[k] = v
        if v >= config.voicing_threshold:
            f0[k] = f
    return {"f0": f0, "voicing_prob": vp}


def _pick_pitch(h: np.ndarray, r: np.ndarray, cand: np.ndarray, sr: int,
                config: LldConfig) -> tuple[float, float]:
    top = h.max()
    if top <= 0:
        return 0.0, 0.0
    interior = np.flatnonzero((h[1:-1] >= h[:-2]) & (h[1:-1] >= h[2:])) + 1
    peaks = list(interior)
    for edge in (0, len(h) - 1):
        if h[edge] >= SHS_NEAR_TIE * top:
            peaks.append(edge)
    peaks = [p for p in peaks if h[p] >= SHS_NEAR_TIE * top] or [int(np.argmax(h))]

    best = None
    for p in peaks:
        lag = sr / cand[p]
        lag_pk, strength = _peak_in(r, int(np.floor(lag / 1.03)), int(np.ceil(lag * 1.03)))
        if lag_pk <= 0:
            continue
        key = (round(strength, 3), -cand[p])
        if best is None or key > best[0]:
            best = (key, lag_pk, strength)
    if best is None:
        return 0.0, 0.0
    _, lag_pk, strength = best
    freq = float(np.clip(sr / lag_pk, config.fmin, config.fmax))
    return freq, float(np.clip(strength, 0.0, 1.0))


# ---------------------------------------------------------- voice quality

HNR_MIN_R = 1e-3
HNR_MAX_R = 1.0 - 1e-5


def compute_voice_quality(clip: AudioClip, f0: np.ndarray,
                          config: LldConfig | None = None) -> dict[str, np.ndarray]:
    """Jitter, shimmer and HNR on frames where ``f0 > 0``; zero elsewhere."""
    config = config or LldConfig()
    x = _mono(clip)
    grid = _grid(clip, config)
    f0 = np.asarray(f0, dtype=np.float64)
    if f0.shape != (grid.n_frames,):
        raise GridMismatch(
            f"F0 contour has {f0.shape[0] if f0.ndim else 0} frames, grid has {grid.n_frames}")
    return _voice_quality_columns(x, grid, f0, config)


def _voice_quality_columns(x, grid, f0, config) -> dict:
    n_frames = grid.n_frames
    jit = np.zeros(n_frames)
    shim = np.zeros(n_frames)
    hnr = np.zeros(n_frames)
    idx = np.flatnonzero(f0 > 0)
    if idx.size == 0:
        return {"jitter_local": jit, "shimmer_local": shim, "hnr_db": hnr}
    frames = _f0_frames(x, grid, config)[idx]
    length = frames.shape[1]
    left = (length - grid.frame_len) // 2
    win = _gauss_window(length)
    acf = _normalized_autocorr(frames, win)
    sr = grid.sample_rate
    for row, k in enumerate(idx):
        period = sr / f0[k]
        # HNR and pitch marks only on real samples, never on the zero padding
        a = max(0, left - k * grid.hop)
        b = min(length, left + len(x) - k * grid.hop)
        lags = acf[row]
        if b - a < length and b - a >= 2 * period + 2:
            lags = _normalized_autocorr(frames[row:row + 1, a:b], _gauss_window(b - a))[0]
        r = float(np.interp(period, np.arange(lags.shape[0]), lags))
        r = min(max(r, HNR_MIN_R), HNR_MAX_R)
        hnr[k] = 10.0 * np.log10(r / (1.0 - r))
        pos, amp = pitch_marks(frames[row, a:b], period)
        jit[k], shim[k] = perturbation(pos, amp)
    return {"jitter_local": jit, "shimmer_local": shim, "hnr_db": hnr}


def _refine(y: np.ndarray, k: int) -> tuple[float, float]:
    if 0 < k < len(y) - 1:
        a, b, c = y[k - 1], y[k], y[k + 1]
        denom = a - 2 * b + c
        if denom < 0:
            off = float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))
            return k + off, float(b - 0.25 * (a - c) * off)
    return float(k), float(y[k])


def pitch_marks(frame: np.ndarray, period: float) -> tuple[np.ndarray, np.ndarray]:
    """Positive-peak positions and amplitudes, one per pitch period.

    Starts from the frame's largest peak and walks outwards, looking for the
    next maximum 0.8..1.2 periods away.
    """
    y = frame - frame.mean()
    n = len(y)
    start = int(np.argmax(y))
    marks = [_refine(y, start)]
    for direction in (1, -1):
        p = marks[0][0]
        while True:
            lo = int(np.ceil(p + direction * 0.8 * period))
            hi = int(np.floor(p + direction * 1.2 * period))
            lo, hi = min(lo, hi), max(lo, hi)
            if lo < 0 or hi >= n:
                break
            k = lo + int(np.argmax(y[lo:hi + 1]))
            m = _refine(y, k)
            if direction > 0:
                marks.append(m)
            else:
                marks.insert(0, m)
            p = m[0]
    pos = np.array([m[0] for m in marks])
    amp = np.array([m[1] for m in marks])
    return pos, amp


def perturbation(pos: np.ndarray, amp: np.ndarray) -> tuple[float, float]:
    """(jitter_local, shimmer_local) from pitch-mark positions and amplitudes."""
    jitter = shimmer = 0.0
    periods = np.diff(pos)
    if len(periods) >= 2 and periods.mean() > 0:
        jitter = float(np.mean(np.abs(np.diff(periods))) / periods.mean())
    amps = np.abs(amp)
    if len(amps) >= 2 and amps.mean() > 0:
        shimmer = float(np.mean(np.abs(np.diff(amps))) / amps.mean())
    return jitter, shimmer


# ------------------------------------------------------------- assembly

def deltas(values: np.ndarray, width: int = 2) -> np.ndarray:
    """Regression deltas over +-``width`` frames with edge replication."""
    n = values.shape[0]
    padded = np.concatenate([np.repeat(values[:1], width, axis=0), values,
                             np.repeat(values[-1:], width, axis=0)])
    num = np.zeros_like(values, dtype=np.float64)
    for k in range(1, width + 1):
        num += k * (padded[width + k:width + k + n] - padded[width - k:width - k + n])
    return num / (2.0 * sum(k * k for k in range(1, width + 1)))


def extract_llds(clip: AudioClip, config: LldConfig = LldConfig()) -> LldContour:
    """Compute every descriptor on one shared grid."""
    x = _mono(clip)
    frame_len = int(round(config.frame_ms * clip.sample_rate / 1000))
    if len(x) < 3 * frame_len:
        raise ClipTooShort(
            f"clip of {len(x)} samples is shorter than three {config.frame_ms} ms frames")
    grid, sp = _spectra(clip, config)
    cols = {}
    cols.update(_spectral_columns(sp, clip.sample_rate, config))
    cols.update(_energy_columns(x, grid, sp))
    cols.update(_mfcc_columns(sp, config.n_coeffs))
    cols.update(_pitch_columns(x, grid, config))
    cols.update(_voice_quality_columns(x, grid, cols["f0"], config))

    base = lld_names(LldConfig(**{**config.to_dict(), "deltas": False}))
    values = np.column_stack([cols[n] for n in base])
    voiced = cols["f0"] > 0
    names = list(base)
    if config.deltas:
        d = deltas(values)
        for j, name in enumerate(base):
            if name in VOICED_ONLY:
                d[~voiced, j] = 0.0
        values = np.hstack([values, d])
        names += [f"{n}_de" for n in base]
    values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
    return LldContour(grid, tuple(names), values, voiced, config)
