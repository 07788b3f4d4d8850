import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voicestate.audio import AudioClip, load_wav, normalize, trim_silence, write_wav
from voicestate.errors import EmptyClip, MalformedFile, NoVoicedContent, UnsupportedEncoding

from conftest import tone


def _pcm16_bytes(samples, rate=16000, channels=1):
    payload = np.asarray(samples, dtype="<i2").tobytes()
    fmt = struct.pack("<HHIIHH", 1, channels, rate, rate * 2 * channels, 2 * channels, 16)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_silence_decodes_to_zeros(tmp_path):
    p = tmp_path / "s.wav"
    p.write_bytes(_pcm16_bytes(np.zeros(16000, dtype=np.int16)))
    clip = load_wav(p)
    assert clip.n_samples == 16000 and clip.sample_rate == 16000 and clip.channels == 1
    assert np.all(clip.samples == 0.0)


def test_fixed_point_scaling(tmp_path):
    p = tmp_path / "h.wav"
    p.write_bytes(_pcm16_bytes([16384, -32768, 0]))
    x = load_wav(p).samples
    assert abs(x[0] - 0.5) <= 1 / 32768
    assert x[1] == -1.0


def test_stereo_passthrough(tmp_path):
    rate, n = 44100, 22050
    data = np.zeros((n, 2), dtype=np.int16)
    p = tmp_path / "st.wav"
    p.write_bytes(_pcm16_bytes(data.ravel(), rate=rate, channels=2))
    clip = load_wav(p)
    assert clip.channels == 2 and clip.sample_rate == rate
    assert clip.samples.shape == (n, 2)


def test_float_roundtrip(tmp_path):
    clip = tone(300, 0.1)
    write_wav(tmp_path / "f.wav", clip, encoding="float32")
    back = load_wav(tmp_path / "f.wav")
    np.testing.assert_allclose(back.samples, clip.samples, atol=1e-7)


def test_truncated_file(tmp_path):
    raw = _pcm16_bytes(np.zeros(1000, dtype=np.int16))
    (tmp_path / "t.wav").write_bytes(raw[:-200])
    with pytest.raises(MalformedFile):
        load_wav(tmp_path / "t.wav")


def test_not_riff(tmp_path):
    (tmp_path / "x.wav").write_bytes(b"OggS" + bytes(100))
    with pytest.raises(MalformedFile):
        load_wav(tmp_path / "x.wav")


def test_compressed_codec_rejected(tmp_path):
    # format tag 0x0055 is MPEG layer 3
    fmt = struct.pack("<HHIIHH", 0x55, 1, 16000, 2000, 1, 0)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", 4) + bytes(4)
    (tmp_path / "m.wav").write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    with pytest.raises(UnsupportedEncoding):
        load_wav(tmp_path / "m.wav")


def test_downmix_is_channel_mean():
    x = np.column_stack([np.full(1000, 0.5), np.full(1000, -0.5)])
    out = normalize(AudioClip(x, 16000, 2))
    assert out.channels == 1
    assert np.all(out.samples == 0.0)


def test_mono_16k_is_identity():
    clip = tone(440, 0.5)
    out = normalize(clip)
    assert np.array_equal(out.samples, clip.samples)


def test_empty_clip():
    with pytest.raises(EmptyClip):
        normalize(AudioClip(np.zeros(0), 16000, 1))


def test_resampled_tone_keeps_frequency():
    out = normalize(tone(440, 1.0, sr=32000))
    assert out.sample_rate == 16000
    spec = np.abs(np.fft.rfft(out.samples))
    freqs = np.fft.rfftfreq(len(out.samples), 1 / 16000)
    assert abs(freqs[np.argmax(spec)] - 440) <= freqs[1]


def test_resampler_suppresses_aliases():
    # 10 kHz at 32 kHz would alias to 6 kHz without the anti-aliasing filter
    out = normalize(tone(10000, 1.0, amp=0.5, sr=32000))
    interior = out.samples[500:-500]  # skip filter start-up transients
    assert np.sqrt(np.mean(interior ** 2)) < 1e-3


@settings(max_examples=15, deadline=None)
@given(rate=st.sampled_from([8000, 11025, 22050, 44100, 48000]),
       channels=st.integers(1, 3), seed=st.integers(0, 1000))
def test_normalize_idempotent(rate, channels, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.5, 0.5, size=(rate // 10, channels)).squeeze()
    once = normalize(AudioClip(x, rate, channels))
    twice = normalize(once)
    assert np.array_equal(once.samples, twice.samples)
    assert np.all(np.abs(once.samples) <= 1.0)


def test_trim_edges():
    sr = 16000
    x = np.concatenate([np.zeros(sr // 2), tone(220, 1.0, amp=0.3).samples, np.zeros(sr // 2)])
    out = trim_silence(AudioClip.mono(x))
    assert abs(out.duration - 1.0) <= 2 * 0.010


def test_trim_keeps_loud_clip():
    clip = tone(220, 1.0, amp=0.3)
    out = trim_silence(clip)
    assert np.array_equal(out.samples, clip.samples)


def test_trim_all_zero():
    with pytest.raises(NoVoicedContent):
        trim_silence(AudioClip.mono(np.zeros(16000)))


def test_trim_keeps_interior_pause():
    sr = 16000
    burst = tone(300, 0.3, amp=0.3).samples
    x = np.concatenate([np.zeros(sr // 4), burst, np.zeros(sr // 2), burst, np.zeros(sr // 4)])
    out = trim_silence(AudioClip.mono(x))
    assert out.duration > 1.0  # both bursts and the half-second gap survive


@settings(max_examples=25, deadline=None)
@given(lead=st.integers(0, 8000), body=st.integers(2000, 12000), tail=st.integers(0, 8000),
       seed=st.integers(0, 10_000))
def test_trim_properties(lead, body, tail, seed):
    rng = np.random.default_rng(seed)
    x = np.concatenate([1e-4 * rng.standard_normal(lead), 0.2 * rng.standard_normal(body),
                        1e-4 * rng.standard_normal(tail)])
    clip = AudioClip.mono(x)
    once = trim_silence(clip)
    assert once.n_samples <= clip.n_samples
    # contiguous subsequence of the input
    start = int(np.flatnonzero(np.isclose(x, once.samples[0]) & (x == once.samples[0]))[0])
    assert np.array_equal(x[start:start + once.n_samples], once.samples)
    twice = trim_silence(once)
    assert once.n_samples - twice.n_samples <= 160
