"""Audio loading and resampling.

WAV is decoded natively via scipy; FLAC needs the optional soundfile package.
Everything downstream works on mono float64 in [-1, 1].
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import AudioDecodeError

_PCM_SCALES = {
    np.dtype(np.int16): 2.0**15,
    np.dtype(np.int32): 2.0**31,
    np.dtype(np.uint8): 2.0**7,
}


def load_audio(path, target_rate: int) -> np.ndarray:
    """Decode ``path`` to mono float64 at ``target_rate`` Hz."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".wav":
        try:
            rate, data = wavfile.read(path)
        except Exception as exc:
            raise AudioDecodeError(f"{path}: cannot decode WAV: {exc}") from exc
    elif suffix == ".flac":
        try:
            import soundfile
        except ImportError as exc:
            raise AudioDecodeError(
                f"{path}: FLAC decoding requires the optional soundfile package"
            ) from exc
        data, rate = soundfile.read(path, dtype="float64")
    else:
        raise AudioDecodeError(f"{path}: unsupported audio format {suffix!r} (expected WAV/FLAC)")

    samples = np.asarray(data)
    if samples.size == 0:
        raise AudioDecodeError(f"{path}: empty audio stream")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.dtype in _PCM_SCALES:
        offset = 128.0 if samples.dtype == np.uint8 else 0.0
        samples = (samples.astype(np.float64) - offset) / _PCM_SCALES[samples.dtype]
    else:
        samples = samples.astype(np.float64)
    if not np.isfinite(samples).all():
        raise AudioDecodeError(f"{path}: non-finite samples")

    if rate != target_rate:
        g = math.gcd(int(target_rate), int(rate))
        samples = resample_poly(samples, target_rate // g, rate // g)
    return samples
