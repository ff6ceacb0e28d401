"""Engine configuration.

One frozen dataclass carries every tunable of the pipeline: mixture sizes,
the variance floor, salient-phoneme count, sigmoid normalization parameters,
fusion weight and the EM stopping rule. Defaults follow the operating point
the engine was designed around.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .errors import FormatError, PreconditionError


@dataclass(frozen=True)
class Config:
    """Pipeline hyperparameters; validated on construction."""

    phoneme_components_max: int = 5
    speaker_components: int = 5
    covariance_regularization: float = 1e-3
    salient_count: int = 12
    sigmoid_center: float = -2000.0
    sigmoid_scale: float = 200.0
    fusion_alpha: float = 0.8
    weight_scale: float = 100.0
    min_phoneme_samples: int = 3
    adaptive_samples_per_component: int = 10
    em_max_iterations: int = 100
    em_tolerance: float = 1e-6
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in (
            "phoneme_components_max",
            "speaker_components",
            "salient_count",
            "min_phoneme_samples",
            "adaptive_samples_per_component",
            "em_max_iterations",
        ):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise PreconditionError(f"config.{name} must be a positive integer, got {value!r}")
        for name in ("covariance_regularization", "sigmoid_scale", "weight_scale", "em_tolerance"):
            value = getattr(self, name)
            if not value > 0.0:
                raise PreconditionError(f"config.{name} must be positive, got {value!r}")
        if not 0.0 <= self.fusion_alpha <= 1.0:
            raise PreconditionError(f"config.fusion_alpha must lie in [0, 1], got {self.fusion_alpha!r}")
        if not isinstance(self.rng_seed, int) or self.rng_seed < 0:
            raise PreconditionError(f"config.rng_seed must be a nonnegative integer, got {self.rng_seed!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise FormatError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def load_config(path: str, base: Config | None = None) -> Config:
    """Read a (possibly partial) JSON config file and overlay it on ``base``."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: config file must contain a JSON object")
    merged = (base or Config()).to_dict()
    unknown = set(data) - set(merged)
    if unknown:
        raise FormatError(f"{path}: unknown config fields: {sorted(unknown)}")
    merged.update(data)
    return Config(**merged)
