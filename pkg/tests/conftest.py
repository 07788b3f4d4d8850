import warnings

import numpy as np
import pytest

from voicestate import corpus, pipeline
from voicestate.audio import AudioClip
from voicestate.functionals import FeatureTable

SR = 16000


def tone(freq, seconds=2.0, amp=0.5, sr=SR, phase=0.0):
    t = np.arange(int(round(seconds * sr))) / sr
    return AudioClip.mono(amp * np.sin(2 * np.pi * freq * t + phase), sr)


def noise(seconds=2.0, amp=0.3, seed=0, sr=SR):
    rng = np.random.default_rng(seed)
    return AudioClip.mono(np.clip(amp * rng.standard_normal(int(seconds * sr)), -1, 1), sr)


def pulse_train(periods, n, amp=0.8, sr=SR):
    """Unit impulses at the cumulative sums of ``periods`` (cycled)."""
    x = np.zeros(n)
    pos, k = 0, 0
    while pos < n:
        x[pos] = amp
        pos += periods[k % len(periods)]
        k += 1
    return AudioClip.mono(x, sr)


def vowel(seconds=2.0, f0=140.0, seed=1, amp=0.4):
    """Formant-filtered pulse train with a little noise: broadband, speech-like."""
    rng = np.random.default_rng(seed)
    spec = corpus.SynthSpec(phrase_seconds=(seconds, seconds))
    prof = corpus.ClassProfile("x", (f0 * 0.9, f0 * 1.1), (amp, amp), 0.0, -40.0)
    x = corpus.synthesize_clip(prof, f0, amp, rng, spec)
    return AudioClip.mono(x, SR)


def table_from(vectors):
    return FeatureTable(tuple(v.recording_id for v in vectors), tuple(vectors[0].names),
                        np.array([v.values for v in vectors]))


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    manifest = corpus.generate_corpus(corpus.SynthSpec(seed=42), out)
    return manifest, corpus.parse_manifest(manifest)


@pytest.fixture(scope="session")
def egemaps_table(synth_corpus):
    manifest, meta = synth_corpus
    vectors, rejects = pipeline.extract_corpus(meta, manifest.parent, "egemaps")
    assert not rejects
    return table_from(vectors)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
