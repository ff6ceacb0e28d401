"""Frame-embedding encoders.

Identifiers:
  ``logmel`` / ``logmel:<n_mels>``  deterministic log-mel filterbank frames
  ``hf:<model_id>``                 pretrained transformer encoder (needs the
                                    optional models extra and local weights;
                                    cache dir via $FEATEX_MODEL_CACHE)
"""

from __future__ import annotations

import os

import numpy as np

from .dsp import log_mel_spectrogram
from .errors import ModelLoadError

CACHE_ENV = "FEATEX_MODEL_CACHE"


class LogMelEncoder:
    def __init__(self, n_mels: int = 40):
        self.n_mels = n_mels

    @property
    def dim(self) -> int:
        return self.n_mels

    def encode(self, samples: np.ndarray, rate: int) -> tuple[np.ndarray, float]:
        return log_mel_spectrogram(samples, rate, self.n_mels)


class HfEncoder:
    """Final-hidden-layer (or chosen layer) embeddings from a pretrained model."""

    def __init__(self, model_id: str, layer: int | None = None):
        try:
            import torch
            from transformers import AutoFeatureExtractor, AutoModel
        except ImportError as exc:
            raise ModelLoadError(f"model load failure: transformers/torch not installed ({exc})") from exc
        cache = os.environ.get(CACHE_ENV)
        try:
            self._processor = AutoFeatureExtractor.from_pretrained(model_id, cache_dir=cache)
            self._model = AutoModel.from_pretrained(model_id, cache_dir=cache)
        except Exception as exc:
            raise ModelLoadError(f"model load failure: cannot load {model_id!r}: {exc}") from exc
        self._model.eval()
        self._torch = torch
        self.layer = layer

    def encode(self, samples: np.ndarray, rate: int) -> tuple[np.ndarray, float]:
        torch = self._torch
        inputs = self._processor(samples, sampling_rate=rate, return_tensors="pt")
        with torch.no_grad():
            out = self._model(**inputs, output_hidden_states=self.layer is not None)
        hidden = out.hidden_states[self.layer] if self.layer is not None else out.last_hidden_state
        frames = hidden.squeeze(0).numpy().astype(np.float64)
        duration = len(samples) / rate
        return frames, frames.shape[0] / duration


def get_encoder(identifier: str, layer: int | None = None):
    if identifier == "logmel":
        return LogMelEncoder()
    if identifier.startswith("logmel:"):
        return LogMelEncoder(n_mels=int(identifier.split(":", 1)[1]))
    if identifier.startswith("hf:"):
        return HfEncoder(identifier.split(":", 1)[1], layer=layer)
    raise ModelLoadError(f"model load failure: unknown encoder identifier {identifier!r}")
