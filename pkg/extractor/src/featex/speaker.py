"""Global speaker-embedding backends.

Identifiers:
  ``spectral-stats``  long-term mean and deviation of log-mel energies
  ``hf:<model_id>``   mean-pooled hidden states of a pretrained encoder
"""

from __future__ import annotations

import os

import numpy as np

from .dsp import log_mel_spectrogram
from .errors import ModelLoadError


class SpectralStatsEmbedder:
    def __init__(self, n_mels: int = 40):
        self.n_mels = n_mels

    def embed(self, samples: np.ndarray, rate: int) -> np.ndarray:
        frames, _ = log_mel_spectrogram(samples, rate, self.n_mels)
        return np.concatenate([frames.mean(axis=0), frames.std(axis=0)])


class HfEmbedder:
    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import AutoFeatureExtractor, AutoModel
        except ImportError as exc:
            raise ModelLoadError(f"model load failure: transformers/torch not installed ({exc})") from exc
        cache = os.environ.get("FEATEX_MODEL_CACHE")
        try:
            self._processor = AutoFeatureExtractor.from_pretrained(model_id, cache_dir=cache)
            self._model = AutoModel.from_pretrained(model_id, cache_dir=cache)
        except Exception as exc:
            raise ModelLoadError(f"model load failure: cannot load {model_id!r}: {exc}") from exc
        self._model.eval()
        self._torch = torch

    def embed(self, samples: np.ndarray, rate: int) -> np.ndarray:
        torch = self._torch
        inputs = self._processor(samples, sampling_rate=rate, return_tensors="pt")
        with torch.no_grad():
            out = self._model(**inputs)
        return out.last_hidden_state.squeeze(0).mean(dim=0).numpy().astype(np.float64)


def get_embedder(identifier: str | None):
    if identifier is None:
        return None
    if identifier == "spectral-stats":
        return SpectralStatsEmbedder()
    if identifier.startswith("hf:"):
        return HfEmbedder(identifier.split(":", 1)[1])
    raise ModelLoadError(f"model load failure: unknown speaker-model identifier {identifier!r}")
