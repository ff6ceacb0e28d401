"""Scoring a test utterance against a speaker profile.

Every phoneme instance is scored under the best available model: its own
phoneme mixture when enrolled (salient or generic), otherwise its broad-class
fallback mixture, otherwise it stays unmatched but visible in the report.
Raw log-likelihoods pass through one shared sigmoid normalization; the tiered
rule picks the strongest available evidence level for the utterance-level
phoneme score, which is fused with the global identity score by linear
interpolation. Higher final scores mean more consistent with the enrolled
speaker.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .config import Config
from .errors import PreconditionError
from .features import UtteranceFeatures, pool_phoneme_vectors
from .gmm import log_density
from .phoneme_classes import broad_class
from .profiling import SpeakerProfile

TIERS = ("salient", "generic", "class", "speaker_only")
MATCH_LEVELS = ("salient", "generic", "class", "unmatched")


@dataclass(frozen=True)
class PhonemeScore:
    """Score of one phoneme instance; unmatched instances carry no score."""

    phoneme_label: str
    interval: tuple[int, int]
    raw_log_likelihood: float | None
    normalized_score: float | None
    matched_level: str


@dataclass(frozen=True)
class ScoreReport:
    utterance_id: str
    phoneme_scores: tuple[PhonemeScore, ...]
    tier_used: str
    phoneme_score: float | None
    speaker_score: float | None
    final_score: float


@dataclass(frozen=True)
class AnomalyRecord:
    """One row of the plot-ready per-phoneme report, in seconds."""

    phoneme_label: str
    start_seconds: float
    end_seconds: float
    normalized_score: float | None
    matched_level: str


def normalize_score(log_likelihood: float, config: Config) -> float:
    """Sigmoid normalization of a raw log-likelihood into (0, 1)."""
    if not math.isfinite(log_likelihood):
        raise PreconditionError(f"log-likelihood must be finite, got {log_likelihood!r}")
    return float(expit((log_likelihood - config.sigmoid_center) / config.sigmoid_scale))


def tiered_phoneme_score(
    profile: SpeakerProfile, instance_scores: list[PhonemeScore]
) -> tuple[str, float | None]:
    """Pick the evidence tier for one utterance and aggregate its scores.

    Tier order: reliability-weighted average over salient instances, plain
    average over enrolled-phoneme instances, plain average over class-scored
    instances, otherwise no phoneme score at all (speaker_only).
    """
    salient = [s for s in instance_scores if s.matched_level == "salient"]
    if salient:
        # Weighted average computed with exponents shifted by the max mean
        # log-likelihood: identical value, immune to exp underflow.
        lls = np.array([profile.phoneme_models[s.phoneme_label].mean_log_likelihood for s in salient])
        weights = np.exp((lls - lls.max()) / profile.config.weight_scale)
        scores = np.array([s.normalized_score for s in salient])
        return "salient", float((weights * scores).sum() / weights.sum())
    generic = [s for s in instance_scores if s.matched_level in ("salient", "generic")]
    if generic:
        return "generic", float(np.mean([s.normalized_score for s in generic]))
    class_level = [s for s in instance_scores if s.matched_level == "class"]
    if class_level:
        return "class", float(np.mean([s.normalized_score for s in class_level]))
    return "speaker_only", None


def score_utterance(profile: SpeakerProfile, utterance: UtteranceFeatures) -> ScoreReport:
    """Score one utterance against a profile.

    Raises ``PreconditionError`` on embedding-dimension mismatch or when the
    utterance offers no evidence at any tier and no usable speaker embedding.
    """
    if utterance.dim != profile.embedding_dim:
        raise PreconditionError(
            f"dimension mismatch: utterance {utterance.utterance_id} has D={utterance.dim}, "
            f"profile expects D={profile.embedding_dim}"
        )
    config = profile.config
    salient_set = set(profile.salient_phonemes)

    instance_scores = []
    for pv in pool_phoneme_vectors(utterance):
        if pv.phoneme_label in profile.phoneme_models:
            raw = log_density(profile.phoneme_models[pv.phoneme_label].model, pv.vector)
            level = "salient" if pv.phoneme_label in salient_set else "generic"
        else:
            cls = broad_class(pv.phoneme_label)
            if cls in profile.class_models:
                raw = log_density(profile.class_models[cls].model, pv.vector)
                level = "class"
            else:
                instance_scores.append(
                    PhonemeScore(pv.phoneme_label, pv.interval, None, None, "unmatched")
                )
                continue
        instance_scores.append(
            PhonemeScore(pv.phoneme_label, pv.interval, raw, normalize_score(raw, config), level)
        )

    tier, s_phn = tiered_phoneme_score(profile, instance_scores)

    s_spk = None
    if utterance.speaker_embedding is not None and profile.speaker_model is not None:
        emb = utterance.speaker_embedding
        if profile.speaker_embedding_dim is not None and emb.shape[0] != profile.speaker_embedding_dim:
            raise PreconditionError(
                f"dimension mismatch: utterance {utterance.utterance_id} has "
                f"D_spk={emb.shape[0]}, profile expects D_spk={profile.speaker_embedding_dim}"
            )
        s_spk = normalize_score(log_density(profile.speaker_model, emb), config)

    if s_phn is not None and s_spk is not None:
        final = config.fusion_alpha * s_phn + (1.0 - config.fusion_alpha) * s_spk
    elif s_phn is not None:
        final = s_phn
    elif s_spk is not None:
        final = s_spk
    else:
        raise PreconditionError(
            f"utterance {utterance.utterance_id}: no scoreable evidence "
            f"(no phoneme matched any tier and no speaker embedding/model)"
        )

    return ScoreReport(
        utterance_id=utterance.utterance_id,
        phoneme_scores=tuple(instance_scores),
        tier_used=tier,
        phoneme_score=s_phn,
        speaker_score=s_spk,
        final_score=final,
    )


def explain(report: ScoreReport, utterance: UtteranceFeatures) -> list[AnomalyRecord]:
    """Per-instance report rows with second-resolution timestamps.

    End times use the inclusive-interval convention: the instance occupies
    frames ``t_start..t_end``, so it ends at ``(t_end + 1) / frame_rate``.
    """
    if report.utterance_id != utterance.utterance_id:
        raise PreconditionError(
            f"report is for {report.utterance_id!r}, utterance is {utterance.utterance_id!r}"
        )
    rate = utterance.frame_rate_hz
    return [
        AnomalyRecord(
            phoneme_label=s.phoneme_label,
            start_seconds=s.interval[0] / rate,
            end_seconds=(s.interval[1] + 1) / rate,
            normalized_score=s.normalized_score,
            matched_level=s.matched_level,
        )
        for s in report.phoneme_scores
    ]


def anomaly_report_to_json(records: list[AnomalyRecord]) -> str:
    return json.dumps(
        [
            {
                "phoneme": r.phoneme_label,
                "start_s": r.start_seconds,
                "end_s": r.end_seconds,
                "score": r.normalized_score,
                "level": r.matched_level,
            }
            for r in records
        ]
    )


def write_anomaly_csv(records: list[AnomalyRecord], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["phoneme", "start_s", "end_s", "score", "level"])
    for r in records:
        score = "" if r.normalized_score is None else repr(r.normalized_score)
        writer.writerow([r.phoneme_label, repr(r.start_seconds), repr(r.end_seconds), score, r.matched_level])
