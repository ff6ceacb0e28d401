"""Extractor error types."""


class AudioDecodeError(ValueError):
    """An audio file could not be decoded."""


class ModelLoadError(RuntimeError):
    """A backend identifier did not resolve to a usable model."""


class JobError(ValueError):
    """An extraction job description is invalid."""
