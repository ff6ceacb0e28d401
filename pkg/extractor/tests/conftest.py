import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile

HERE = Path(__file__).resolve()
FEATEX_SRC = HERE.parents[1] / "src"
ENGINE_SRC = HERE.parents[2] / "src"  # the scoring engine this front end feeds
for p in (str(FEATEX_SRC), str(ENGINE_SRC)):
    if p not in sys.path:
        sys.path.insert(0, p)

RATE = 16000


def _tone(freqs, duration, amp=0.3):
    t = np.arange(int(duration * RATE)) / RATE
    x = sum(np.sin(2 * np.pi * f * t) / (i + 1) for i, f in enumerate(freqs))
    return amp * x / np.max(np.abs(x))


def _noise(duration, rng, amp=0.2, highpass=True):
    x = rng.standard_normal(int(duration * RATE))
    if highpass:
        x = np.diff(x, prepend=0.0)  # crude spectral tilt toward fricative-like
    return amp * x / np.max(np.abs(x))


def _silence(duration):
    return np.zeros(int(duration * RATE))


def synth_speech_like(seed):
    """Alternating voiced tones and noise bursts with silence gaps."""
    rng = np.random.default_rng(seed)
    parts = [_silence(0.1)]
    for _ in range(4):
        f0 = rng.uniform(110, 180)
        parts.append(_tone([f0, 2 * f0, 3 * f0], rng.uniform(0.15, 0.3)))
        parts.append(_silence(rng.uniform(0.05, 0.1)))
        parts.append(_noise(rng.uniform(0.1, 0.2), rng))
        parts.append(_silence(rng.uniform(0.05, 0.1)))
    return np.concatenate(parts)


@pytest.fixture(scope="session")
def smoke_wavs(tmp_path_factory):
    """Five short speech-like WAV files from one synthetic voice."""
    root = tmp_path_factory.mktemp("audio")
    paths = []
    for i in range(5):
        x = synth_speech_like(seed=100 + i)
        path = root / f"utt{i}.wav"
        wavfile.write(path, RATE, (x * 32767).astype(np.int16))
        paths.append(str(path))
    return paths
