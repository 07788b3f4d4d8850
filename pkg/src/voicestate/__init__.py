"""Speech-based patient-state classification: acoustic features, linear SVMs, LOSO evaluation."""

__version__ = "0.1.0"

from .audio import AudioClip, load_wav, normalize, trim_silence, write_wav
from .classifier import (LinearSvmModel, Standardizer, apply_standardizer, class_weights, fit,
                         fit_standardizer, predict, train)
from .corpus import RecordingMeta, SynthSpec, generate_corpus, parse_manifest, write_manifest
from .evaluation import (DEFAULT_C_GRID, ConfusionMatrix, EvalReport, export_spectrogram,
                         make_loso_folds, metrics, run_loso, severity_from_days)
from .functionals import (BRUTE, BRUTE_DIM, EGEMAPS88, FeatureVector, FunctionalSpec,
                          apply_functionals, brute_force_vector, egemaps_vector)
from .lld import LldConfig, LldContour, extract_llds

__all__ = [
    "AudioClip", "load_wav", "normalize", "trim_silence", "write_wav",
    "LinearSvmModel", "Standardizer", "apply_standardizer", "class_weights", "fit",
    "fit_standardizer", "predict", "train",
    "RecordingMeta", "SynthSpec", "generate_corpus", "parse_manifest", "write_manifest",
    "DEFAULT_C_GRID", "ConfusionMatrix", "EvalReport", "export_spectrogram",
    "make_loso_folds", "metrics", "run_loso", "severity_from_days",
    "BRUTE", "BRUTE_DIM", "EGEMAPS88", "FeatureVector", "FunctionalSpec",
    "apply_functionals", "brute_force_vector", "egemaps_vector",
    "LldConfig", "LldContour", "extract_llds",
]
