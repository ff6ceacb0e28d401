"""Extraction job model and the audio-to-manifest pipeline.

The output is the ``pvp-features/1`` JSON-lines manifest the scoring engine
reads: a header with the embedding dimensions, then one record per audio
file with frame embeddings, phone intervals (inclusive frame indices) and
the optional global speaker embedding.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aligner import get_aligner
from .audio import load_audio
from .encoders import get_encoder
from .errors import JobError
from .speaker import get_embedder

MANIFEST_SCHEMA = "pvp-features/1"
LABELS = ("bonafide", "spoof", "unknown")

log = logging.getLogger("featex")


@dataclass(frozen=True)
class ExtractionJob:
    audio_files: tuple[str, ...]
    speaker_id: str
    label: str
    output: str
    encoder: str = "logmel"
    aligner: str = "energy"
    speaker_model: str | None = "spectral-stats"
    target_sample_rate: int = 16000
    encoder_layer: int | None = None

    def __post_init__(self) -> None:
        if not self.audio_files:
            raise JobError("job lists no audio files")
        if not self.speaker_id:
            raise JobError("speaker_id must be non-empty")
        if self.label not in LABELS:
            raise JobError(f"label must be one of {LABELS}, got {self.label!r}")
        if self.target_sample_rate < 1:
            raise JobError(f"target_sample_rate must be positive, got {self.target_sample_rate}")


def job_from_json(path) -> ExtractionJob:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise JobError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise JobError(f"{path}: job file must contain a JSON object")
    if "audio_dir" in doc:
        base = Path(doc["audio_dir"])
        files = sorted(str(p) for ext in ("*.wav", "*.flac") for p in base.glob(ext))
    else:
        files = [str(p) for p in doc.get("audio", [])]
    known = {"audio", "audio_dir", "speaker_id", "label", "output", "encoder",
             "aligner", "speaker_model", "target_sample_rate", "encoder_layer"}
    unknown = set(doc) - known
    if unknown:
        raise JobError(f"{path}: unknown job fields: {sorted(unknown)}")
    return ExtractionJob(
        audio_files=tuple(files),
        speaker_id=doc.get("speaker_id", ""),
        label=doc.get("label", "unknown"),
        output=doc["output"],
        encoder=doc.get("encoder", "logmel"),
        aligner=doc.get("aligner", "energy"),
        speaker_model=doc.get("speaker_model", "spectral-stats"),
        target_sample_rate=int(doc.get("target_sample_rate", 16000)),
        encoder_layer=doc.get("encoder_layer"),
    )


def intervals_to_frames(
    spans: list[tuple[str, float, float]], frame_rate: float, n_frames: int
) -> list[tuple[str, int, int]]:
    """Convert second-resolution spans to inclusive frame index intervals.

    Starts floor, ends ceil-minus-one, both clipped to [0, n_frames - 1];
    spans that collapse to nothing are dropped.
    """
    out = []
    for symbol, t0, t1 in spans:
        start = max(0, min(n_frames - 1, math.floor(t0 * frame_rate)))
        end = max(0, min(n_frames - 1, math.ceil(t1 * frame_rate) - 1))
        if end < start:
            continue
        out.append((symbol, start, end))
    out.sort(key=lambda iv: (iv[1], iv[2]))
    return out


def extract(job: ExtractionJob) -> str:
    """Run the job; returns the output manifest path.

    Audio that cannot be decoded is an error; a failing alignment only skips
    that file's intervals (the record keeps its frames and embedding).
    """
    encoder = get_encoder(job.encoder, layer=job.encoder_layer)
    aligner = get_aligner(job.aligner)
    embedder = get_embedder(job.speaker_model)

    records = []
    dim = None
    spk_dim = None
    for audio_path in job.audio_files:
        samples = load_audio(audio_path, job.target_sample_rate)
        frames, frame_rate = encoder.encode(samples, job.target_sample_rate)
        if dim is None:
            dim = frames.shape[1]
        try:
            spans = aligner.align(samples, job.target_sample_rate)
        except Exception as exc:
            log.warning("alignment failed for %s, skipping intervals: %s", audio_path, exc)
            spans = []
        intervals = intervals_to_frames(spans, frame_rate, frames.shape[0])
        emb = None
        if embedder is not None:
            emb = embedder.embed(samples, job.target_sample_rate)
            if spk_dim is None:
                spk_dim = int(emb.shape[0])
        records.append({
            "id": Path(audio_path).stem,
            "speaker": job.speaker_id,
            "label": job.label,
            "frame_rate_hz": float(frame_rate),
            "frames": np.asarray(frames, dtype=np.float64).tolist(),
            "phonemes": [[s, a, b] for s, a, b in intervals],
            "spk_emb": None if emb is None else np.asarray(emb, dtype=np.float64).tolist(),
        })

    seen = set()
    for rec in records:
        base = rec["id"]
        n = 1
        while rec["id"] in seen:
            rec["id"] = f"{base}-{n}"
            n += 1
        seen.add(rec["id"])

    header = {"schema": MANIFEST_SCHEMA, "dim": dim, "spk_dim": spk_dim}
    with open(job.output, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return job.output
