"""WAV decoding, mono/16 kHz normalisation and edge-silence trimming."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import EmptyClip, MalformedFile, NoVoicedContent, UnsupportedEncoding

TARGET_RATE = 16000

_FMT_PCM = 0x0001
_FMT_FLOAT = 0x0003
_FMT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Decoded waveform.

    ``samples`` has shape ``(n,)`` for mono or ``(n, channels)`` for
    multichannel audio; values are float64 in [-1, 1].
    """

    samples: np.ndarray
    sample_rate: int
    channels: int = 1

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.channels < 1:
            raise ValueError("channels must be >= 1")

    @property
    def n_samples(self) -> int:
        """Samples per channel."""
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @classmethod
    def mono(cls, samples, sample_rate: int = TARGET_RATE) -> "AudioClip":
        x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
        return cls(x, int(sample_rate), 1)


def _parse_chunks(data: bytes):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedFile("not a RIFF/WAVE file")
    pos = 12
    chunks = {}
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MalformedFile(f"chunk {cid!r} truncated ({len(body)} of {size} bytes)")
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)
    if b"fmt " not in chunks:
        raise MalformedFile("missing fmt chunk")
    if b"data" not in chunks:
        raise MalformedFile("missing data chunk")
    return chunks


def load_wav(path) -> AudioClip:
    """Read a PCM-16 or IEEE-float WAV file.

    Channel count and sample rate are kept as stored; use :func:`normalize`
    to get the mono 16 kHz clip the feature extractors expect.
    """
    path = Path(path)
    chunks = _parse_chunks(path.read_bytes())
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise MalformedFile("fmt chunk too short")
    tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == _FMT_EXTENSIBLE:
        if len(fmt) < 40:
            raise MalformedFile("extensible fmt chunk too short")
        (tag,) = struct.unpack("<H", fmt[24:26])
    if channels < 1 or rate < 1:
        raise MalformedFile("invalid channel count or sample rate")

    if tag == _FMT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif tag == _FMT_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    elif tag == _FMT_FLOAT and bits == 64:
        dtype, scale = np.dtype("<f8"), 1.0
    else:
        raise UnsupportedEncoding(f"format tag {tag:#06x} with {bits} bits per sample")
    if block_align != channels * dtype.itemsize:
        raise MalformedFile("block alignment disagrees with channel count")

    raw = chunks[b"data"]
    n_frames = len(raw) // block_align
    x = np.frombuffer(raw[:n_frames * block_align], dtype=dtype).astype(np.float64) * scale
    x = np.clip(np.nan_to_num(x), -1.0, 1.0)
    if channels > 1:
        x = x.reshape(n_frames, channels)
    return AudioClip(x, int(rate), int(channels))


def write_wav(path, clip: AudioClip, encoding: str = "pcm16") -> None:
    """Write ``clip`` as 16-bit PCM (``"pcm16"``) or 32-bit float (``"float32"``)."""
    x = np.clip(np.asarray(clip.samples, dtype=np.float64), -1.0, 1.0)
    if encoding == "pcm16":
        payload = np.round(x * 32767.0).astype("<i2").tobytes()
        tag, bits = _FMT_PCM, 16
    elif encoding == "float32":
        payload = x.astype("<f4").tobytes()
        tag, bits = _FMT_FLOAT, 32
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    block = clip.channels * bits // 8
    fmt = struct.pack("<HHIIHH", tag, clip.channels, clip.sample_rate,
                      clip.sample_rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)


def normalize(clip: AudioClip, target_rate: int = TARGET_RATE) -> AudioClip:
    """Downmix to mono by channel mean and resample to ``target_rate``.

    Resampling is polyphase windowed-sinc (Kaiser) filtering, so content
    above the new Nyquist frequency is suppressed rather than aliased.
    """
    if clip.n_samples == 0:
        raise EmptyClip("cannot normalise an empty clip")
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.ndim == 2:
        x = x.mean(axis=1)
    if clip.sample_rate != target_rate:
        g = gcd(int(target_rate), int(clip.sample_rate))
        x = resample_poly(x, target_rate // g, clip.sample_rate // g)
    return AudioClip(np.clip(x, -1.0, 1.0), int(target_rate), 1)


def frame_rms(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """RMS of each full frame; empty array when ``len(x) < frame_len``."""
    if len(x) < frame_len:
        return np.zeros(0)
    frames = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop]
    return np.sqrt(np.mean(frames * frames, axis=1))


def trim_silence(clip: AudioClip, frame_ms: float = 25, hop_ms: float = 10,
                 energy_floor_db: float = -45, min_voiced_frames: int = 3) -> AudioClip:
    """Cut leading and trailing low-energy regions.

    Only the outer edges are removed; pauses between the first and last
    loud run are kept. Boundaries are located on the frame grid and then
    refined to the first/last 1 ms window whose RMS clears the floor.
    """
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("trim_silence expects a mono clip")
    sr = clip.sample_rate
    frame_len = max(1, int(round(frame_ms * sr / 1000)))
    hop = max(1, int(round(hop_ms * sr / 1000)))
    floor = 10.0 ** (energy_floor_db / 20.0)

    loud = frame_rms(x, frame_len, hop) > floor
    if len(x) < frame_len and len(x) > 0:
        loud = np.array([np.sqrt(np.mean(x * x)) > floor])
    runs = _runs(loud, min_voiced_frames)
    if not runs:
        raise NoVoicedContent("no run of loud frames above the energy floor")
    first, last = runs[0][0], runs[-1][1]
    lo = first * hop
    hi = min(len(x), last * hop + frame_len)
    if last == len(loud) - 1:
        hi = len(x)

    w = max(1, sr // 1000)
    seg = x[lo:hi]
    csum = np.concatenate(([0.0], np.cumsum(seg * seg)))
    if len(seg) >= w:
        win_rms = np.sqrt((csum[w:] - csum[:-w]) / w)
        above = np.flatnonzero(win_rms > floor)
        if above.size:
            start = lo + int(above[0])
            stop = lo + int(above[-1]) + w
            lo, hi = start, min(hi, stop)
    return AudioClip(x[lo:hi].copy(), sr, 1)


def _runs(mask: np.ndarray, min_len: int):
    """Index ranges [start, stop_inclusive] of True runs at least ``min_len`` long."""
    out = []
    start = None
    for i, v in enumerate(list(mask) + [False]):
        if v and start is None:
            start = i
        elif not v and start is not None:
            if i - start >= min_len:
                out.append((start, i - 1))
            start = None
    return out
