"""
Frame-level descriptors of a synthetic vowel
============================================

Build a short voiced phrase, compute the per-frame descriptor contours and
look at pitch, voice quality and a couple of cepstral coefficients.
"""

import numpy as np

from voicestate.audio import AudioClip
from voicestate.corpus import DEFAULT_PROFILES, SynthSpec, synthesize_clip
from voicestate.lld import LldConfig, extract_llds

# a "mid" speaker at 170 Hz, drawn from the same generator the test corpus uses
rng = np.random.default_rng(0)
spec = SynthSpec(phrase_seconds=(2.0, 2.0))
x = synthesize_clip(DEFAULT_PROFILES[1], 170.0, 0.3, rng, spec)
clip = AudioClip.mono(x, spec.sample_rate)
print(f"{clip.duration:.2f} s at {clip.sample_rate} Hz")

###############################################################################
# Contours share one 25 ms / 10 ms grid; with deltas there are 106 columns.
contour = extract_llds(clip, LldConfig(deltas=True))
print(contour.n_frames, "frames x", len(contour.names), "columns")

###############################################################################
# Pitch is only defined on voiced frames.
f0 = contour.column("f0")[contour.voiced]
print(f"voiced {contour.voiced.mean():.0%} of frames, median F0 {np.median(f0):.1f} Hz")

###############################################################################
# Voice quality: the generator perturbs every period a little and glides the
# pitch, so jitter and shimmer are small but not zero.
for name in ("jitter_local", "shimmer_local", "hnr_db"):
    v = contour.column(name)[contour.voiced]
    print(f"{name:14s} median {np.median(v):8.4f}")

###############################################################################
# MFCC 1 and 2 are gain-invariant: scaling the signal leaves them unchanged.
quiet = extract_llds(AudioClip.mono(x * 0.1, spec.sample_rate))
for name in ("mfcc_01", "mfcc_02"):
    d = np.max(np.abs(quiet.column(name) - contour.column(name)))
    print(f"{name}: max change under 0.1x gain {d:.1e}")
