"""Audio-to-feature-manifest extraction for phoneme voice profiling."""

from .aligner import get_aligner
from .audio import load_audio
from .encoders import get_encoder
from .errors import AudioDecodeError, JobError, ModelLoadError
from .extract import ExtractionJob, extract, intervals_to_frames, job_from_json
from .speaker import get_embedder

__version__ = "0.1.0"

__all__ = [
    "AudioDecodeError",
    "ExtractionJob",
    "JobError",
    "ModelLoadError",
    "extract",
    "get_aligner",
    "get_embedder",
    "get_encoder",
    "intervals_to_frames",
    "job_from_json",
    "load_audio",
]
