"""Exception and warning types shared across the engine."""


class FormatError(ValueError):
    """A file does not conform to its declared schema (bad record, bad version)."""


class PreconditionError(ValueError):
    """An operation was called with inputs that violate its contract."""


class ManifestWarning(UserWarning):
    """Non-fatal oddity in a feature manifest, e.g. overlapping aligner intervals."""
