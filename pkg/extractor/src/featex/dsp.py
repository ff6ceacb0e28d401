"""Shared framing and filterbank primitives for the built-in backends."""

from __future__ import annotations

import numpy as np

WIN_SECONDS = 0.025
HOP_SECONDS = 0.010
PRE_EMPHASIS = 0.97
LOG_FLOOR = 1e-10


def frame_signal(samples: np.ndarray, rate: int) -> tuple[np.ndarray, float]:
    """Split into overlapping windows; returns (frames, frame_rate_hz).

    Always yields at least one (zero-padded) frame so even sub-window audio
    produces a T >= 1 feature matrix.
    """
    win = int(round(rate * WIN_SECONDS))
    hop = int(round(rate * HOP_SECONDS))
    x = np.append(samples[0], samples[1:] - PRE_EMPHASIS * samples[:-1]) if len(samples) > 1 else samples
    if len(x) < win:
        x = np.pad(x, (0, win - len(x)))
    n_frames = 1 + (len(x) - win) // hop
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx] * np.hanning(win)[None, :], rate / hop


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, rate: int, f_min: float = 50.0) -> np.ndarray:
    f_max = rate / 2.0
    mel_points = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bins = np.floor((n_fft + 1) * hz_points / rate).astype(int)
    bank = np.zeros((n_mels, n_fft // 2 + 1))
    for i in range(n_mels):
        lo, mid, hi = bins[i], bins[i + 1], bins[i + 2]
        if mid > lo:
            bank[i, lo:mid] = (np.arange(lo, mid) - lo) / (mid - lo)
        if hi > mid:
            bank[i, mid:hi] = (hi - np.arange(mid, hi)) / (hi - mid)
    return bank


def log_mel_spectrogram(samples: np.ndarray, rate: int, n_mels: int) -> tuple[np.ndarray, float]:
    frames, frame_rate = frame_signal(samples, rate)
    n_fft = frames.shape[1]
    spectrum = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    bank = mel_filterbank(n_mels, n_fft, rate)
    return np.log(spectrum @ bank.T + LOG_FLOOR), frame_rate


def band_energies(samples: np.ndarray, rate: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Per-frame (total energy, low-band share, spectral centroid in Hz)."""
    frames, frame_rate = frame_signal(samples, rate)
    spectrum = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    freqs = np.fft.rfftfreq(frames.shape[1], d=1.0 / rate)
    total = spectrum.sum(axis=1)
    low = spectrum[:, freqs < 1000.0].sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        centroid = np.where(total > 0, (spectrum * freqs[None, :]).sum(axis=1) / np.maximum(total, 1e-30), 0.0)
        low_share = np.where(total > 0, low / np.maximum(total, 1e-30), 0.0)
    return total, low_share, centroid, frame_rate
