"""File-to-features glue: load -> normalise -> trim -> LLDs -> functionals."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from functools import partial
from pathlib import Path
from typing import Sequence

from .audio import load_wav, normalize, trim_silence
from .corpus import RecordingMeta
from .errors import VoiceStateError
from .functionals import BRUTE, EGEMAPS88, FeatureVector, vector_for
from .lld import LldConfig, extract_llds

SET_ALIASES = {"egemaps": EGEMAPS88, "brute": BRUTE, EGEMAPS88: EGEMAPS88, BRUTE: BRUTE}


def lld_config_for(set_id: str, config: LldConfig | None = None) -> LldConfig:
    """The brute-force set needs delta columns; eGeMAPS does not."""
    config = config or LldConfig()
    return replace(config, deltas=(set_id == BRUTE))


def features_from_wav(path, set_id: str = EGEMAPS88, config: LldConfig | None = None,
                      recording_id: str = "") -> FeatureVector:
    set_id = SET_ALIASES[set_id]
    config = lld_config_for(set_id, config)
    clip = normalize(load_wav(path))
    clip = trim_silence(clip, config.frame_ms, config.hop_ms, config.energy_floor_db)
    return vector_for(set_id, extract_llds(clip, config), recording_id)


def _one(item, set_id, config):
    rid, path = item
    try:
        return features_from_wav(path, set_id, config, rid), None
    except (VoiceStateError, OSError, ValueError) as exc:
        return None, f"{rid}: {type(exc).__name__}: {exc}"


def extract_corpus(meta: Sequence[RecordingMeta], base_dir, set_id: str = EGEMAPS88,
                   config: LldConfig | None = None, jobs: int = 1):
    """Features for every manifest row; returns (vectors, rejects) in manifest order.

    A failing file is reported in ``rejects`` and does not stop the run.
    """
    items = [(m.recording_id, str(m.resolve(base_dir))) for m in meta]
    work = partial(_one, set_id=SET_ALIASES[set_id], config=config)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(work, items, chunksize=4))
    else:
        out = [work(it) for it in items]
    vectors = [v for v, _ in out if v is not None]
    rejects = [r for _, r in out if r is not None]
    return vectors, rejects


def manifest_dir(manifest_path) -> Path:
    return Path(manifest_path).resolve().parent
