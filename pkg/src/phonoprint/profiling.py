"""Speaker profile construction and the versioned profile file format.

A profile is built from bona fide reference utterances only. Every phoneme
with enough pooled vectors gets its own diagonal GMM whose component count
adapts to the sample size; each model carries a reliability weight derived
from the mean in-sample log-likelihood, and the most reliable phonemes form
the salient set used by the first scoring tier. Broad phonetic classes get
fallback models pooled over all their member phonemes (including ones too
rare for an individual model), and available speaker embeddings yield one
global identity model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .config import Config
from .errors import FormatError, PreconditionError
from .features import UtteranceFeatures, pool_phoneme_vectors
from .gmm import DiagonalGmm, fit, log_density_many
from .phoneme_classes import BROAD_CLASSES, broad_class

PROFILE_SCHEMA = "pvp-profile/1"


@dataclass(frozen=True, eq=False)
class PhonemeModel:
    """Per-phoneme mixture with its enrollment statistics."""

    phoneme_label: str
    model: DiagonalGmm
    sample_count: int
    mean_log_likelihood: float
    reliability_weight: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhonemeModel):
            return NotImplemented
        return (
            self.phoneme_label == other.phoneme_label
            and self.model == other.model
            and self.sample_count == other.sample_count
            and self.mean_log_likelihood == other.mean_log_likelihood
            and self.reliability_weight == other.reliability_weight
        )


@dataclass(frozen=True, eq=False)
class ClassModel:
    """Broad-class fallback mixture pooled over all member phonemes."""

    class_label: str
    model: DiagonalGmm
    sample_count: int
    mean_log_likelihood: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClassModel):
            return NotImplemented
        return (
            self.class_label == other.class_label
            and self.model == other.model
            and self.sample_count == other.sample_count
            and self.mean_log_likelihood == other.mean_log_likelihood
        )


@dataclass(frozen=True, eq=False)
class SpeakerProfile:
    speaker_id: str
    phoneme_models: dict[str, PhonemeModel]
    salient_phonemes: tuple[str, ...]
    class_models: dict[str, ClassModel]
    speaker_model: DiagonalGmm | None
    config: Config
    embedding_dim: int
    speaker_embedding_dim: int | None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpeakerProfile):
            return NotImplemented
        return (
            self.speaker_id == other.speaker_id
            and self.phoneme_models == other.phoneme_models
            and self.salient_phonemes == other.salient_phonemes
            and self.class_models == other.class_models
            and self.speaker_model == other.speaker_model
            and self.config == other.config
            and self.embedding_dim == other.embedding_dim
            and self.speaker_embedding_dim == other.speaker_embedding_dim
        )


def adaptive_components(n_samples: int, config: Config) -> int:
    """Component count for a model fit on ``n_samples`` pooled vectors."""
    return min(
        config.phoneme_components_max,
        max(1, n_samples // config.adaptive_samples_per_component),
    )


def salient_ranking(models: dict[str, PhonemeModel]) -> list[str]:
    """Labels sorted by descending reliability, ties by ascending label.

    Ranking uses the mean log-likelihood directly: the reliability weight is
    a strictly increasing function of it, so the order is identical and does
    not underflow for extreme weight scales.
    """
    return sorted(models, key=lambda p: (-models[p].mean_log_likelihood, p))


def build_profile(reference: list[UtteranceFeatures], config: Config) -> SpeakerProfile:
    """Build a speaker profile from bona fide reference utterances.

    Raises ``PreconditionError`` on an empty or mixed-speaker reference set,
    on spoof-labeled input, or when no phoneme and no broad class reaches
    ``config.min_phoneme_samples`` pooled vectors.
    """
    if not reference:
        raise PreconditionError("reference set is empty")
    speaker_ids = {u.speaker_id for u in reference}
    if len(speaker_ids) != 1:
        raise PreconditionError(f"reference mixes speaker_ids: {sorted(speaker_ids)}")
    bad = [u.utterance_id for u in reference if u.label == "spoof"]
    if bad:
        raise PreconditionError(f"reference contains spoof-labeled utterances: {bad[:5]}")
    dims = {u.dim for u in reference}
    if len(dims) != 1:
        raise PreconditionError(f"reference mixes embedding dimensions: {sorted(dims)}")
    (dim,) = dims

    by_phoneme: dict[str, list[np.ndarray]] = {}
    for u in reference:
        for pv in pool_phoneme_vectors(u):
            by_phoneme.setdefault(pv.phoneme_label, []).append(pv.vector)
    if not by_phoneme:
        raise PreconditionError("reference contains no phoneme intervals")

    phoneme_models: dict[str, PhonemeModel] = {}
    for label in sorted(by_phoneme):
        vectors = np.asarray(by_phoneme[label])
        n_p = vectors.shape[0]
        if n_p < config.min_phoneme_samples:
            continue
        model = fit(vectors, adaptive_components(n_p, config), config)
        mean_ll = float(log_density_many(model, vectors).mean())
        phoneme_models[label] = PhonemeModel(
            phoneme_label=label,
            model=model,
            sample_count=n_p,
            mean_log_likelihood=mean_ll,
            reliability_weight=math.exp(mean_ll / config.weight_scale),
        )

    salient = tuple(salient_ranking(phoneme_models)[: config.salient_count])

    by_class: dict[str, list[np.ndarray]] = {}
    for label, vectors in by_phoneme.items():
        by_class.setdefault(broad_class(label), []).extend(vectors)
    class_models: dict[str, ClassModel] = {}
    for cls in sorted(by_class):
        vectors = np.asarray(by_class[cls])
        n_c = vectors.shape[0]
        if n_c < config.min_phoneme_samples:
            continue
        model = fit(vectors, adaptive_components(n_c, config), config)
        class_models[cls] = ClassModel(
            class_label=cls,
            model=model,
            sample_count=n_c,
            mean_log_likelihood=float(log_density_many(model, vectors).mean()),
        )

    if not phoneme_models and not class_models:
        raise PreconditionError(
            f"no usable phoneme: every label and class has fewer than "
            f"{config.min_phoneme_samples} pooled vectors"
        )

    embeddings = [u.speaker_embedding for u in reference if u.speaker_embedding is not None]
    speaker_model = None
    speaker_dim = None
    if embeddings:
        emb_dims = {e.shape[0] for e in embeddings}
        if len(emb_dims) != 1:
            raise PreconditionError(f"reference mixes speaker embedding dimensions: {sorted(emb_dims)}")
        if len(embeddings) >= config.min_phoneme_samples:
            speaker_model = fit(np.asarray(embeddings), config.speaker_components, config)
            speaker_dim = embeddings[0].shape[0]

    return SpeakerProfile(
        speaker_id=next(iter(speaker_ids)),
        phoneme_models=phoneme_models,
        salient_phonemes=salient,
        class_models=class_models,
        speaker_model=speaker_model,
        config=config,
        embedding_dim=dim,
        speaker_embedding_dim=speaker_dim,
    )


def _gmm_to_dict(model: DiagonalGmm) -> dict:
    return {
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "variances": model.variances.tolist(),
    }


def _gmm_from_dict(data: dict, floor: float, where: str) -> DiagonalGmm:
    try:
        model = DiagonalGmm(
            weights=np.asarray(data["weights"], dtype=np.float64),
            means=np.asarray(data["means"], dtype=np.float64),
            variances=np.asarray(data["variances"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: invalid mixture: {exc}") from exc
    if (model.variances < floor).any():
        raise FormatError(f"{where}: variance below the configured floor {floor}")
    return model


def save_profile(profile: SpeakerProfile, path) -> None:
    doc = {
        "schema": PROFILE_SCHEMA,
        "speaker_id": profile.speaker_id,
        "config": profile.config.to_dict(),
        "embedding_dim": profile.embedding_dim,
        "speaker_embedding_dim": profile.speaker_embedding_dim,
        "phoneme_models": [
            {
                "label": pm.phoneme_label,
                "sample_count": pm.sample_count,
                "mean_log_likelihood": pm.mean_log_likelihood,
                "reliability_weight": pm.reliability_weight,
                **_gmm_to_dict(pm.model),
            }
            for pm in profile.phoneme_models.values()
        ],
        "salient_phonemes": list(profile.salient_phonemes),
        "class_models": [
            {
                "label": cm.class_label,
                "sample_count": cm.sample_count,
                "mean_log_likelihood": cm.mean_log_likelihood,
                **_gmm_to_dict(cm.model),
            }
            for cm in profile.class_models.values()
        ],
        "speaker_model": None if profile.speaker_model is None else _gmm_to_dict(profile.speaker_model),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_profile(path) -> SpeakerProfile:
    """Load and validate a profile file; fails on unknown schema or tampering."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != PROFILE_SCHEMA:
        raise FormatError(f"{path}: unsupported profile schema "
                          f"{doc.get('schema') if isinstance(doc, dict) else doc!r}")
    try:
        config = Config.from_dict(doc["config"])
    except (KeyError, TypeError, PreconditionError) as exc:
        raise FormatError(f"{path}: invalid config snapshot: {exc}") from exc
    floor = config.covariance_regularization

    phoneme_models: dict[str, PhonemeModel] = {}
    for entry in doc.get("phoneme_models", []):
        label = entry["label"]
        model = _gmm_from_dict(entry, floor, f"{path}: phoneme {label!r}")
        mean_ll = float(entry["mean_log_likelihood"])
        weight = float(entry["reliability_weight"])
        expected = math.exp(mean_ll / config.weight_scale)
        if not math.isclose(weight, expected, rel_tol=1e-12, abs_tol=0.0):
            raise FormatError(
                f"{path}: phoneme {label!r}: reliability_weight {weight} "
                f"inconsistent with mean_log_likelihood (expected {expected})"
            )
        sample_count = int(entry["sample_count"])
        if sample_count < config.min_phoneme_samples:
            raise FormatError(
                f"{path}: phoneme {label!r}: sample_count {sample_count} below "
                f"config.min_phoneme_samples {config.min_phoneme_samples}"
            )
        phoneme_models[label] = PhonemeModel(
            phoneme_label=label,
            model=model,
            sample_count=sample_count,
            mean_log_likelihood=mean_ll,
            reliability_weight=weight,
        )

    salient = tuple(doc.get("salient_phonemes", []))
    if len(salient) > config.salient_count:
        raise FormatError(f"{path}: salient set larger than config.salient_count")
    if not set(salient) <= set(phoneme_models):
        raise FormatError(f"{path}: salient phonemes not a subset of phoneme models")
    if list(salient) != salient_ranking(phoneme_models)[: len(salient)]:
        raise FormatError(f"{path}: salient phonemes not ordered by reliability")

    class_models: dict[str, ClassModel] = {}
    for entry in doc.get("class_models", []):
        label = entry["label"]
        if label not in BROAD_CLASSES:
            raise FormatError(f"{path}: unknown broad class {label!r}")
        class_models[label] = ClassModel(
            class_label=label,
            model=_gmm_from_dict(entry, floor, f"{path}: class {label!r}"),
            sample_count=int(entry["sample_count"]),
            mean_log_likelihood=float(entry["mean_log_likelihood"]),
        )

    speaker_model = None
    if doc.get("speaker_model") is not None:
        speaker_model = _gmm_from_dict(doc["speaker_model"], floor, f"{path}: speaker model")

    try:
        return SpeakerProfile(
            speaker_id=doc["speaker_id"],
            phoneme_models=phoneme_models,
            salient_phonemes=salient,
            class_models=class_models,
            speaker_model=speaker_model,
            config=config,
            embedding_dim=int(doc["embedding_dim"]),
            speaker_embedding_dim=(
                None if doc.get("speaker_embedding_dim") is None else int(doc["speaker_embedding_dim"])
            ),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc
