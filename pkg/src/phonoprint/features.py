"""Utterance feature model and the JSON-lines manifest format.

A manifest decouples the scoring engine from any audio or ML ecosystem: the
first line declares the schema and embedding dimensions, every following line
is one utterance with its frame-embedding matrix, aligner intervals and an
optional global speaker embedding. Floats are serialized with Python's
shortest round-trip repr, so write-then-read is bit-exact.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ManifestWarning, PreconditionError

MANIFEST_SCHEMA = "pvp-features/1"
LABELS = ("bonafide", "spoof", "unknown")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class UtteranceFeatures:
    """One utterance: frame embeddings, phoneme intervals, optional speaker embedding.

    Frame indices in ``phoneme_intervals`` are inclusive on both ends.
    Intervals must be non-decreasing in start index; overlaps are tolerated
    (forced aligners emit them) but raise a ``ManifestWarning``.
    """

    utterance_id: str
    speaker_id: str
    label: str
    frames: np.ndarray
    frame_rate_hz: float
    phoneme_intervals: tuple[tuple[str, int, int], ...]
    speaker_embedding: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.utterance_id:
            raise PreconditionError("utterance_id must be non-empty")
        if self.label not in LABELS:
            raise PreconditionError(f"label must be one of {LABELS}, got {self.label!r}")
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise PreconditionError(f"frames must be a T x D matrix with T,D >= 1, got shape {frames.shape}")
        if not np.isfinite(frames).all():
            raise PreconditionError(f"utterance {self.utterance_id}: non-finite frame value")
        object.__setattr__(self, "frames", _freeze(frames))
        if not (np.isfinite(self.frame_rate_hz) and self.frame_rate_hz > 0):
            raise PreconditionError(f"frame_rate_hz must be positive, got {self.frame_rate_hz!r}")

        t_max = frames.shape[0] - 1
        prev_start = -1
        prev_end = -1
        cleaned = []
        for phoneme, t_start, t_end in self.phoneme_intervals:
            if not phoneme:
                raise PreconditionError(f"utterance {self.utterance_id}: empty phoneme label")
            t_start, t_end = int(t_start), int(t_end)
            if not (0 <= t_start <= t_end <= t_max):
                raise PreconditionError(
                    f"utterance {self.utterance_id}: interval out of range "
                    f"({phoneme!r}: {t_start}..{t_end}, valid 0..{t_max})"
                )
            if t_start < prev_start:
                raise PreconditionError(
                    f"utterance {self.utterance_id}: intervals not ordered by start index"
                )
            if t_start <= prev_end and prev_end >= 0:
                warnings.warn(
                    f"utterance {self.utterance_id}: overlapping intervals at frame {t_start}",
                    ManifestWarning,
                    stacklevel=2,
                )
            prev_start, prev_end = t_start, t_end
            cleaned.append((str(phoneme), t_start, t_end))
        object.__setattr__(self, "phoneme_intervals", tuple(cleaned))

        if self.speaker_embedding is not None:
            emb = np.asarray(self.speaker_embedding, dtype=np.float64)
            if emb.ndim != 1 or emb.shape[0] < 1:
                raise PreconditionError("speaker_embedding must be a non-empty vector")
            if not np.isfinite(emb).all():
                raise PreconditionError(f"utterance {self.utterance_id}: non-finite speaker embedding")
            object.__setattr__(self, "speaker_embedding", _freeze(emb))

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UtteranceFeatures):
            return NotImplemented
        if self.speaker_embedding is None:
            emb_equal = other.speaker_embedding is None
        else:
            emb_equal = other.speaker_embedding is not None and np.array_equal(
                self.speaker_embedding, other.speaker_embedding
            )
        return (
            self.utterance_id == other.utterance_id
            and self.speaker_id == other.speaker_id
            and self.label == other.label
            and self.frame_rate_hz == other.frame_rate_hz
            and self.phoneme_intervals == other.phoneme_intervals
            and np.array_equal(self.frames, other.frames)
            and emb_equal
        )


@dataclass(frozen=True, eq=False)
class PhonemeVector:
    """Mean-pooled embedding of one phoneme instance."""

    phoneme_label: str
    vector: np.ndarray
    source_utterance_id: str
    interval: tuple[int, int]

    def __post_init__(self) -> None:
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1:
            raise PreconditionError("phoneme vector must be 1-D")
        if not np.isfinite(vec).all():
            raise PreconditionError("phoneme vector has non-finite values")
        object.__setattr__(self, "vector", _freeze(vec))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhonemeVector):
            return NotImplemented
        return (
            self.phoneme_label == other.phoneme_label
            and self.source_utterance_id == other.source_utterance_id
            and self.interval == other.interval
            and np.array_equal(self.vector, other.vector)
        )


def pool_phoneme_vectors(utterance: UtteranceFeatures) -> list[PhonemeVector]:
    """Mean-pool the frames of every phoneme interval, in interval order.

    The interval endpoints are inclusive, so the divisor is
    ``t_end - t_start + 1``.
    """
    out = []
    for phoneme, t_start, t_end in utterance.phoneme_intervals:
        vec = utterance.frames[t_start : t_end + 1].mean(axis=0)
        out.append(
            PhonemeVector(
                phoneme_label=phoneme,
                vector=vec,
                source_utterance_id=utterance.utterance_id,
                interval=(t_start, t_end),
            )
        )
    return out


def _utterance_to_record(u: UtteranceFeatures) -> dict:
    return {
        "id": u.utterance_id,
        "speaker": u.speaker_id,
        "label": u.label,
        "frame_rate_hz": u.frame_rate_hz,
        "frames": u.frames.tolist(),
        "phonemes": [[p, s, e] for p, s, e in u.phoneme_intervals],
        "spk_emb": None if u.speaker_embedding is None else u.speaker_embedding.tolist(),
    }


def write_manifest(utterances: list[UtteranceFeatures], path) -> None:
    """Write a feature manifest; all records must share the embedding dimension."""
    dim = None
    spk_dim = None
    seen_ids = set()
    for u in utterances:
        if dim is None:
            dim = u.dim
        elif u.dim != dim:
            raise PreconditionError(f"dimension mismatch: utterance {u.utterance_id} has D={u.dim}, expected {dim}")
        if u.speaker_embedding is not None:
            d_spk = u.speaker_embedding.shape[0]
            if spk_dim is None:
                spk_dim = d_spk
            elif d_spk != spk_dim:
                raise PreconditionError(
                    f"dimension mismatch: utterance {u.utterance_id} has D_spk={d_spk}, expected {spk_dim}"
                )
        if u.utterance_id in seen_ids:
            raise PreconditionError(f"duplicate utterance_id {u.utterance_id!r}")
        seen_ids.add(u.utterance_id)

    header = {"schema": MANIFEST_SCHEMA, "dim": dim, "spk_dim": spk_dim}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for u in utterances:
            fh.write(json.dumps(_utterance_to_record(u)) + "\n")


def _parse_record(rec: dict, dim: int | None, spk_dim: int | None, lineno: int) -> UtteranceFeatures:
    required = ("id", "speaker", "label", "frame_rate_hz", "frames", "phonemes")
    for key in required:
        if key not in rec:
            raise FormatError(f"line {lineno}: missing field {key!r}")
    frames = rec["frames"]
    if not frames or not isinstance(frames, list):
        raise FormatError(f"line {lineno}: field 'frames' must be a non-empty matrix")
    row_len = {len(row) for row in frames if isinstance(row, list)}
    if len(row_len) != 1:
        raise FormatError(f"line {lineno}: ragged 'frames' matrix")
    (d,) = row_len
    if dim is not None and d != dim:
        raise FormatError(f"line {lineno}: dimension mismatch (record D={d}, manifest D={dim})")
    spk_emb = rec.get("spk_emb")
    if spk_emb is not None:
        if spk_dim is None:
            raise FormatError(f"line {lineno}: record has spk_emb but header declares spk_dim null")
        if len(spk_emb) != spk_dim:
            raise FormatError(
                f"line {lineno}: dimension mismatch (record D_spk={len(spk_emb)}, manifest D_spk={spk_dim})"
            )
    try:
        return UtteranceFeatures(
            utterance_id=rec["id"],
            speaker_id=rec["speaker"],
            label=rec["label"],
            frames=np.asarray(frames, dtype=np.float64),
            frame_rate_hz=rec["frame_rate_hz"],
            phoneme_intervals=tuple((p[0], p[1], p[2]) for p in rec["phonemes"]),
            speaker_embedding=None if spk_emb is None else np.asarray(spk_emb, dtype=np.float64),
        )
    except PreconditionError as exc:
        raise FormatError(f"line {lineno}: {exc}") from exc
    except (TypeError, IndexError, ValueError) as exc:
        raise FormatError(f"line {lineno}: malformed record: {exc}") from exc


def read_manifest(path) -> list[UtteranceFeatures]:
    """Read a feature manifest. Hard invariant violations raise ``FormatError``
    with the offending line number; overlapping intervals only warn."""
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise FormatError(f"{path}: empty manifest (missing header)")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: line 1: invalid JSON header: {exc}") from exc
        if not isinstance(header, dict) or header.get("schema") != MANIFEST_SCHEMA:
            raise FormatError(
                f"{path}: unsupported manifest schema {header.get('schema') if isinstance(header, dict) else header!r}"
            )
        dim = header.get("dim")
        spk_dim = header.get("spk_dim")
        if dim is not None and (not isinstance(dim, int) or dim < 1):
            raise FormatError(f"{path}: header dim must be a positive integer or null")
        if spk_dim is not None and (not isinstance(spk_dim, int) or spk_dim < 1):
            raise FormatError(f"{path}: header spk_dim must be a positive integer or null")

        utterances = []
        seen_ids: set[str] = set()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            u = _parse_record(rec, dim, spk_dim, lineno)
            if dim is None:
                dim = u.dim
            if u.utterance_id in seen_ids:
                raise FormatError(f"{path}: line {lineno}: duplicate utterance_id {u.utterance_id!r}")
            seen_ids.add(u.utterance_id)
            utterances.append(u)
    return utterances
