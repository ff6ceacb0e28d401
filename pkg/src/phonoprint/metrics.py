"""Detection metrics: ROC, AUC, EER, and per-speaker phoneme distinctiveness.

Convention: bona fide scores are high; a spoof accepted at a threshold is a
false positive. The ROC is swept over every distinct score (ties collapse
into one step), AUC is the trapezoidal integral, and the EER is linearly
interpolated on the segment of operating points where FAR crosses FRR.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import PreconditionError


@dataclass(frozen=True)
class EvalResult:
    roc: tuple[tuple[float, float], ...]
    auc_percent: float
    eer_percent: float
    eer_threshold: float
    n_bonafide: int
    n_spoof: int


def evaluate(scores: Iterable[tuple[float, str]]) -> EvalResult:
    """Compute ROC/AUC/EER from (score, label) pairs, labels bonafide/spoof."""
    bona, spoof = [], []
    for score, label in scores:
        if not np.isfinite(score):
            raise PreconditionError(f"non-finite score {score!r}")
        if label == "bonafide":
            bona.append(score)
        elif label == "spoof":
            spoof.append(score)
        else:
            raise PreconditionError(f"label must be bonafide or spoof, got {label!r}")
    if not bona or not spoof:
        raise PreconditionError(
            f"need both classes to evaluate, got {len(bona)} bonafide / {len(spoof)} spoof"
        )
    bona_arr = np.asarray(bona)
    spoof_arr = np.asarray(spoof)
    n_b, n_s = len(bona), len(spoof)

    # One operating point per distinct threshold, descending; point 0 is the
    # accept-nothing corner with a virtual threshold above every score.
    thresholds = np.unique(np.concatenate([bona_arr, spoof_arr]))[::-1]
    tpr = [0.0]
    fpr = [0.0]
    thr = [float(thresholds[0]) + 1.0]
    for t in thresholds:
        tpr.append(float((bona_arr >= t).sum()) / n_b)
        fpr.append(float((spoof_arr >= t).sum()) / n_s)
        thr.append(float(t))

    auc = 0.0
    for i in range(len(fpr) - 1):
        auc += (fpr[i + 1] - fpr[i]) * (tpr[i] + tpr[i + 1]) / 2.0

    # FAR - FRR is non-decreasing along the sweep; interpolate where it
    # crosses zero. diff[0] = -1, diff[-1] = +1, so a bracket always exists.
    far = np.asarray(fpr)
    frr = 1.0 - np.asarray(tpr)
    diff = far - frr
    i = int(np.argmax(diff >= 0.0))
    denom = (far[i] - far[i - 1]) + (frr[i - 1] - frr[i])
    u = (frr[i - 1] - far[i - 1]) / denom if denom > 0 else 0.0
    eer = far[i - 1] + u * (far[i] - far[i - 1])
    eer_threshold = thr[i - 1] + u * (thr[i] - thr[i - 1])

    return EvalResult(
        roc=tuple(zip(fpr, tpr)),
        auc_percent=100.0 * auc,
        eer_percent=100.0 * float(eer),
        eer_threshold=float(eer_threshold),
        n_bonafide=n_b,
        n_spoof=n_s,
    )


def write_roc_csv(result: EvalResult, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["false_positive_rate", "true_positive_rate"])
    for x, y in result.roc:
        writer.writerow([repr(x), repr(y)])


@dataclass(frozen=True, eq=False)
class DistinctivenessMatrix:
    """Cosine-distance of each speaker's phoneme mean from the pooled centroid.

    ``values[i, j]`` is ``1 - cos(v, c)`` for speaker i, phoneme j; cells with
    no data (or a zero-norm vector) are NaN.
    """

    speakers: tuple[str, ...]
    phonemes: tuple[str, ...]
    values: np.ndarray


def phoneme_distinctiveness(
    per_speaker_vectors: Mapping[str, Mapping[str, Sequence[np.ndarray]]],
) -> DistinctivenessMatrix:
    speakers = sorted(per_speaker_vectors)
    if len(speakers) < 2:
        raise PreconditionError(f"need at least 2 speakers, got {len(speakers)}")
    phonemes = sorted({p for spk in speakers for p in per_speaker_vectors[spk]})

    dims = {
        np.asarray(v).shape[-1]
        for spk in speakers
        for vecs in per_speaker_vectors[spk].values()
        for v in vecs
    }
    if len(dims) > 1:
        raise PreconditionError(f"vectors mix dimensions: {sorted(dims)}")

    values = np.full((len(speakers), len(phonemes)), np.nan)
    for j, phoneme in enumerate(phonemes):
        pooled = [
            np.asarray(v, dtype=np.float64)
            for spk in speakers
            for v in per_speaker_vectors[spk].get(phoneme, [])
        ]
        if not pooled:
            continue
        centroid = np.mean(pooled, axis=0)
        c_norm = np.linalg.norm(centroid)
        if c_norm == 0.0:
            continue
        for i, spk in enumerate(speakers):
            own = per_speaker_vectors[spk].get(phoneme, [])
            if not own:
                continue
            v = np.mean(np.asarray(own, dtype=np.float64), axis=0)
            v_norm = np.linalg.norm(v)
            if v_norm == 0.0:
                continue
            values[i, j] = 1.0 - float(v @ centroid) / (v_norm * c_norm)
    return DistinctivenessMatrix(speakers=tuple(speakers), phonemes=tuple(phonemes), values=values)


def write_distinctiveness_csv(matrix: DistinctivenessMatrix, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["speaker", *matrix.phonemes])
    for i, spk in enumerate(matrix.speakers):
        row = [spk]
        for j in range(len(matrix.phonemes)):
            cell = matrix.values[i, j]
            row.append("" if np.isnan(cell) else repr(float(cell)))
        writer.writerow(row)
