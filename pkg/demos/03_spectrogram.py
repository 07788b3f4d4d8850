"""
Spectrogram export
==================

Write a dB spectrogram of a two-tone clip as a PGM image and a CSV matrix.
"""

import tempfile
from pathlib import Path

import numpy as np

from voicestate.audio import AudioClip
from voicestate.evaluation import export_spectrogram, read_pgm

sr = 16000
t = np.arange(sr) / sr
# 440 Hz for the first half second, 1 kHz for the second
x = np.where(t < 0.5, 0.5 * np.sin(2 * np.pi * 440 * t), 0.3 * np.sin(2 * np.pi * 1000 * t))
clip = AudioClip.mono(x, sr)

prefix = Path(tempfile.mkdtemp()) / "two_tones"
spec = export_spectrogram(clip, prefix)
print(spec.db.shape, "frames x bins, bin width", spec.bin_width, "Hz")

###############################################################################
# The loudest bin of each frame follows the tone.
peak_hz = spec.freqs[np.argmax(spec.db, axis=1)]
print("first frames peak at", peak_hz[:3], "Hz; last frames at", peak_hz[-3:], "Hz")

###############################################################################
# Image rows are frequency bins with the highest frequency on top.
img = read_pgm(f"{prefix}.pgm")
print("image", img.shape, "written to", f"{prefix}.pgm")
