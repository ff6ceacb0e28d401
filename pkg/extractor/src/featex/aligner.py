"""Phone-interval aligners producing (symbol, start_s, end_s) triples.

Identifiers:
  ``energy``            heuristic segmenter: finds speech runs by adaptive
                        energy thresholding, splits long runs at energy
                        minima, labels each segment by coarse spectral shape
                        (vowel-, fricative- or nasal-like pseudo-phones)
  ``hf-ctc:<model_id>`` pretrained CTC phoneme recognizer (optional extra)
"""

from __future__ import annotations

import os

import numpy as np

from .dsp import band_energies
from .errors import ModelLoadError

MIN_SEGMENT_SECONDS = 0.04
MAX_SEGMENT_SECONDS = 0.35


class EnergyAligner:
    """Coarse acoustic segmenter; symbols come from a small fixed set so the
    same pseudo-phones recur across recordings of one voice."""

    def align(self, samples: np.ndarray, rate: int) -> list[tuple[str, float, float]]:
        energy, low_share, centroid, frame_rate = band_energies(samples, rate)
        if energy.size == 0 or energy.max() <= 0:
            return []
        db = 10.0 * np.log10(np.maximum(energy, 1e-30) / energy.max())
        speech = db > -35.0

        runs = []
        start = None
        for i, flag in enumerate(speech):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                runs.append((start, i))
                start = None
        if start is not None:
            runs.append((start, len(speech)))

        max_len = int(MAX_SEGMENT_SECONDS * frame_rate)
        min_len = max(1, int(MIN_SEGMENT_SECONDS * frame_rate))
        segments = []
        for lo, hi in runs:
            if hi - lo < min_len:
                continue
            segments.extend(self._split(lo, hi, energy, max_len))

        out = []
        for lo, hi in segments:
            symbol = self._classify(
                float(low_share[lo:hi].mean()), float(centroid[lo:hi].mean()), float(db[lo:hi].mean())
            )
            out.append((symbol, lo / frame_rate, hi / frame_rate))
        return out

    @staticmethod
    def _split(lo: int, hi: int, energy: np.ndarray, max_len: int) -> list[tuple[int, int]]:
        if hi - lo <= max_len:
            return [(lo, hi)]
        # cut at the quietest frame in the middle half, then recurse
        mid_lo = lo + (hi - lo) // 4
        mid_hi = hi - (hi - lo) // 4
        cut = mid_lo + int(np.argmin(energy[mid_lo:mid_hi]))
        if cut <= lo or cut >= hi:
            cut = (lo + hi) // 2
        return EnergyAligner._split(lo, cut, energy, max_len) + EnergyAligner._split(cut, hi, energy, max_len)

    @staticmethod
    def _classify(low_share: float, centroid: float, level_db: float) -> str:
        if centroid > 3000.0:
            return "s"
        if centroid > 1500.0:
            return "f" if level_db < -12.0 else "i"
        if low_share > 0.85:
            return "n" if level_db < -15.0 else "u"
        return "m" if level_db < -15.0 else "a"


class HfCtcAligner:
    """Frame-level CTC phoneme recognizer turned into time intervals."""

    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import AutoProcessor, Wav2Vec2ForCTC
        except ImportError as exc:
            raise ModelLoadError(f"model load failure: transformers/torch not installed ({exc})") from exc
        cache = os.environ.get("FEATEX_MODEL_CACHE")
        try:
            self._processor = AutoProcessor.from_pretrained(model_id, cache_dir=cache)
            self._model = Wav2Vec2ForCTC.from_pretrained(model_id, cache_dir=cache)
        except Exception as exc:
            raise ModelLoadError(f"model load failure: cannot load {model_id!r}: {exc}") from exc
        self._model.eval()
        self._torch = torch

    def align(self, samples: np.ndarray, rate: int) -> list[tuple[str, float, float]]:
        torch = self._torch
        inputs = self._processor(samples, sampling_rate=rate, return_tensors="pt")
        with torch.no_grad():
            logits = self._model(**inputs).logits.squeeze(0)
        ids = logits.argmax(dim=-1).tolist()
        blank = self._model.config.pad_token_id
        duration = len(samples) / rate
        frame_seconds = duration / len(ids)
        out = []
        current, seg_start = None, 0
        for i, token in enumerate(ids + [blank]):
            if token != current:
                if current is not None and current != blank:
                    symbol = self._processor.tokenizer.convert_ids_to_tokens(current)
                    out.append((symbol, seg_start * frame_seconds, i * frame_seconds))
                current, seg_start = token, i
        return out


def get_aligner(identifier: str):
    if identifier == "energy":
        return EnergyAligner()
    if identifier.startswith("hf-ctc:"):
        return HfCtcAligner(identifier.split(":", 1)[1])
    raise ModelLoadError(f"model load failure: unknown aligner identifier {identifier!r}")
