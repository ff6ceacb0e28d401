"""Speaker-specific deepfake scoring from per-phoneme voice profiles."""

from .config import Config, load_config
from .errors import FormatError, ManifestWarning, PreconditionError
from .features import (
    MANIFEST_SCHEMA,
    PhonemeVector,
    UtteranceFeatures,
    pool_phoneme_vectors,
    read_manifest,
    write_manifest,
)
from .gmm import DiagonalGmm, FitResult, fit, fit_em, log_density, log_density_many
from .metrics import DistinctivenessMatrix, EvalResult, evaluate, phoneme_distinctiveness
from .phoneme_classes import BROAD_CLASSES, broad_class
from .profiling import (
    PROFILE_SCHEMA,
    ClassModel,
    PhonemeModel,
    SpeakerProfile,
    adaptive_components,
    build_profile,
    load_profile,
    save_profile,
)
from .scoring import (
    AnomalyRecord,
    PhonemeScore,
    ScoreReport,
    explain,
    normalize_score,
    score_utterance,
    tiered_phoneme_score,
)
from .synth import SynthSpec, generate, random_spec, spec_from_json

__version__ = "0.1.0"

__all__ = [
    "AnomalyRecord",
    "BROAD_CLASSES",
    "ClassModel",
    "Config",
    "DiagonalGmm",
    "DistinctivenessMatrix",
    "EvalResult",
    "FitResult",
    "FormatError",
    "MANIFEST_SCHEMA",
    "ManifestWarning",
    "PROFILE_SCHEMA",
    "PhonemeModel",
    "PhonemeScore",
    "PhonemeVector",
    "PreconditionError",
    "ScoreReport",
    "SpeakerProfile",
    "SynthSpec",
    "UtteranceFeatures",
    "adaptive_components",
    "broad_class",
    "build_profile",
    "evaluate",
    "explain",
    "fit",
    "fit_em",
    "generate",
    "load_config",
    "load_profile",
    "log_density",
    "log_density_many",
    "normalize_score",
    "phoneme_distinctiveness",
    "pool_phoneme_vectors",
    "random_spec",
    "read_manifest",
    "save_profile",
    "score_utterance",
    "spec_from_json",
    "tiered_phoneme_score",
    "write_manifest",
]
