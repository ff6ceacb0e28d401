"""Deterministic synthetic feature generator for end-to-end verification.

Two virtual voices share a phoneme inventory: the enrolled one draws phoneme
vectors from per-phoneme reference mixtures, the impostor from mean-shifted
copies (optionally only for a chosen subset of phonemes, which mimics a
cloning system that reproduces most sounds but misses a few). Frames inside
an interval are the drawn vector plus isotropic jitter, so mean-pooling
recovers the draw up to jitter; with jitter 0 the recovery is exact. All
randomness is derived from (seed, stream, utterance index), so generation is
reproducible under any scheduling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import FormatError, PreconditionError
from .features import UtteranceFeatures
from .gmm import DiagonalGmm

# Inventory used by default specs: cycles through broad phonetic classes.
DEFAULT_INVENTORY = (
    "a", "e", "i", "o", "u", "ɛ", "ɔ", "æ", "ə", "ɪ", "ʊ", "ʌ",
    "p", "b", "t", "d", "k", "ɡ",
    "f", "v", "s", "z", "ʃ", "ʒ", "θ", "ð", "h", "x",
    "m", "n", "ŋ", "ɲ",
    "l", "ɹ", "j", "w",
    "tʃ", "dʒ", "ts", "dz",
)

_STREAM_ENROLL, _STREAM_GENUINE, _STREAM_SPOOF = 0, 1, 2


@dataclass(frozen=True, eq=False)
class SynthSpec:
    """Generating distributions and utterance-shape parameters."""

    dim: int
    spk_dim: int | None
    phoneme_inventory: tuple[str, ...]
    mixtures: dict[str, DiagonalGmm]
    impostor_shift: float | np.ndarray
    shifted_phonemes: frozenset[str] | None = None
    utterance_length_range: tuple[int, int] = (6, 12)
    frames_per_phoneme: tuple[int, int] = (2, 6)
    frame_jitter: float = 0.01
    frame_rate_hz: float = 50.0
    speaker_mean: np.ndarray | None = None
    speaker_shift: float | np.ndarray = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not self.phoneme_inventory:
            raise PreconditionError("phoneme inventory must be non-empty")
        if self.dim < 1:
            raise PreconditionError("dim must be >= 1")
        if self.spk_dim is not None and self.spk_dim < 1:
            raise PreconditionError("spk_dim must be >= 1 or None")
        missing = set(self.phoneme_inventory) - set(self.mixtures)
        if missing:
            raise PreconditionError(f"inventory phonemes without mixtures: {sorted(missing)[:5]}")
        for label, mix in self.mixtures.items():
            if mix.dim != self.dim:
                raise PreconditionError(f"mixture {label!r} has dim {mix.dim}, spec dim {self.dim}")
            if (mix.variances <= 0).any():
                raise PreconditionError(f"mixture {label!r} has non-positive variance")
        lo, hi = self.utterance_length_range
        if not (1 <= lo <= hi):
            raise PreconditionError(f"invalid utterance_length_range {self.utterance_length_range}")
        flo, fhi = self.frames_per_phoneme
        if not (1 <= flo <= fhi):
            raise PreconditionError(f"invalid frames_per_phoneme {self.frames_per_phoneme}")
        if self.frame_jitter < 0:
            raise PreconditionError("frame_jitter must be >= 0")
        if self.spk_dim is not None:
            mean = self.speaker_mean
            if mean is None:
                mean = np.zeros(self.spk_dim)
            mean = np.asarray(mean, dtype=np.float64)
            if mean.shape != (self.spk_dim,):
                raise PreconditionError(f"speaker_mean shape {mean.shape} != ({self.spk_dim},)")
            object.__setattr__(self, "speaker_mean", mean)

    def shift_vector(self) -> np.ndarray:
        shift = np.asarray(self.impostor_shift, dtype=np.float64)
        if shift.ndim == 0:
            shift = np.full(self.dim, float(shift))
        if shift.shape != (self.dim,):
            raise PreconditionError(f"impostor_shift shape {shift.shape} != ({self.dim},)")
        return shift


def random_spec(
    n_phonemes: int = 40,
    dim: int = 8,
    spk_dim: int | None = 16,
    components: int = 2,
    impostor_shift: float | np.ndarray = 3.0,
    shifted_phonemes: frozenset[str] | None = None,
    variance_scales: dict[str, float] | None = None,
    mean_spread: float = 4.0,
    speaker_shift: float | np.ndarray = 3.0,
    seed: int = 0,
    **kwargs,
) -> SynthSpec:
    """Build a spec with seeded random per-phoneme mixtures.

    ``variance_scales`` multiplies the unit generating variance per phoneme,
    so tight (small-scale) phonemes become the enrolled voice's most
    consistent ones.
    """
    if n_phonemes <= len(DEFAULT_INVENTORY):
        inventory = DEFAULT_INVENTORY[:n_phonemes]
    else:
        inventory = DEFAULT_INVENTORY + tuple(
            f"ph{i:02d}" for i in range(n_phonemes - len(DEFAULT_INVENTORY))
        )
    rng = np.random.default_rng([seed, 0xA11CE])
    mixtures = {}
    for label in inventory:
        scale = 1.0 if variance_scales is None else variance_scales.get(label, 1.0)
        k = components
        weights = rng.dirichlet(np.full(k, 5.0))
        means = rng.normal(0.0, mean_spread, size=(k, dim))
        variances = np.full((k, dim), float(scale))
        mixtures[label] = DiagonalGmm(weights=weights, means=means, variances=variances)
    speaker_mean = None if spk_dim is None else rng.normal(0.0, 2.0, size=spk_dim)
    return SynthSpec(
        dim=dim,
        spk_dim=spk_dim,
        phoneme_inventory=inventory,
        mixtures=mixtures,
        impostor_shift=impostor_shift,
        shifted_phonemes=shifted_phonemes,
        speaker_mean=speaker_mean,
        speaker_shift=speaker_shift,
        rng_seed=seed,
        **kwargs,
    )


def spec_from_json(path) -> SynthSpec:
    """Load a spec document; mixtures may be explicit or seeded via a recipe."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: spec must be a JSON object")
    known = {
        "dim", "spk_dim", "phonemes", "components", "impostor_shift", "shifted_phonemes",
        "variance_scales", "mean_spread", "speaker_shift", "seed", "utterance_length_range",
        "frames_per_phoneme", "frame_jitter", "frame_rate_hz", "mixtures",
    }
    unknown = set(doc) - known
    if unknown:
        raise FormatError(f"{path}: unknown spec fields: {sorted(unknown)}")

    kwargs = {}
    for key in ("utterance_length_range", "frames_per_phoneme"):
        if key in doc:
            kwargs[key] = tuple(doc[key])
    for key in ("frame_jitter", "frame_rate_hz"):
        if key in doc:
            kwargs[key] = float(doc[key])

    shifted = doc.get("shifted_phonemes")
    shifted = None if shifted is None else frozenset(shifted)
    try:
        if "mixtures" in doc:
            mixtures = {
                label: DiagonalGmm(
                    weights=np.asarray(m["weights"], dtype=np.float64),
                    means=np.asarray(m["means"], dtype=np.float64),
                    variances=np.asarray(m["variances"], dtype=np.float64),
                )
                for label, m in doc["mixtures"].items()
            }
            return SynthSpec(
                dim=int(doc["dim"]),
                spk_dim=doc.get("spk_dim"),
                phoneme_inventory=tuple(doc.get("phonemes", sorted(mixtures))),
                mixtures=mixtures,
                impostor_shift=doc.get("impostor_shift", 0.0),
                shifted_phonemes=shifted,
                speaker_shift=doc.get("speaker_shift", 0.0),
                rng_seed=int(doc.get("seed", 0)),
                **kwargs,
            )
        phonemes = doc.get("phonemes", 40)
        n_phonemes = phonemes if isinstance(phonemes, int) else len(phonemes)
        return random_spec(
            n_phonemes=n_phonemes,
            dim=int(doc.get("dim", 8)),
            spk_dim=doc.get("spk_dim", 16),
            components=int(doc.get("components", 2)),
            impostor_shift=doc.get("impostor_shift", 3.0),
            shifted_phonemes=shifted,
            variance_scales=doc.get("variance_scales"),
            mean_spread=float(doc.get("mean_spread", 4.0)),
            speaker_shift=doc.get("speaker_shift", 3.0),
            seed=int(doc.get("seed", 0)),
            **kwargs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise FormatError(f"{path}: invalid spec: {exc}") from exc


def _sample_mixture(mix: DiagonalGmm, rng: np.random.Generator) -> np.ndarray:
    k = rng.choice(mix.n_components, p=mix.weights)
    return rng.normal(mix.means[k], np.sqrt(mix.variances[k]))


def _make_utterance(
    spec: SynthSpec, utterance_id: str, label: str, impostor: bool, stream: int, index: int
) -> UtteranceFeatures:
    rng = np.random.default_rng([spec.rng_seed, stream, index])
    lo, hi = spec.utterance_length_range
    n_phonemes = int(rng.integers(lo, hi + 1))
    shift = spec.shift_vector()
    shifted_set = spec.shifted_phonemes

    frames = []
    intervals = []
    cursor = 0
    for _ in range(n_phonemes):
        phoneme = spec.phoneme_inventory[rng.integers(len(spec.phoneme_inventory))]
        vec = _sample_mixture(spec.mixtures[phoneme], rng)
        if impostor and (shifted_set is None or phoneme in shifted_set):
            vec = vec + shift
        flo, fhi = spec.frames_per_phoneme
        n_frames = int(rng.integers(flo, fhi + 1))
        block = np.tile(vec, (n_frames, 1))
        if spec.frame_jitter > 0:
            block = block + spec.frame_jitter * rng.standard_normal(block.shape)
        frames.append(block)
        intervals.append((phoneme, cursor, cursor + n_frames - 1))
        cursor += n_frames

    emb = None
    if spec.spk_dim is not None:
        mean = spec.speaker_mean
        if impostor:
            mean = mean + np.broadcast_to(np.asarray(spec.speaker_shift, dtype=np.float64), mean.shape)
        emb = rng.normal(mean, 1.0)

    return UtteranceFeatures(
        utterance_id=utterance_id,
        speaker_id="poi",
        label=label,
        frames=np.vstack(frames) if frames else np.zeros((1, spec.dim)),
        frame_rate_hz=spec.frame_rate_hz,
        phoneme_intervals=tuple(intervals),
        speaker_embedding=emb,
    )


def generate(
    spec: SynthSpec, n_enroll: int, n_genuine_test: int, n_spoof_test: int
) -> tuple[list[UtteranceFeatures], list[UtteranceFeatures]]:
    """Generate (enrollment, test) utterance lists; deterministic in the spec seed."""
    if min(n_enroll, n_genuine_test, n_spoof_test) < 0:
        raise PreconditionError("utterance counts must be >= 0")
    enroll = [
        _make_utterance(spec, f"enroll-{i:04d}", "bonafide", False, _STREAM_ENROLL, i)
        for i in range(n_enroll)
    ]
    test = [
        _make_utterance(spec, f"genuine-{i:04d}", "bonafide", False, _STREAM_GENUINE, i)
        for i in range(n_genuine_test)
    ]
    test += [
        _make_utterance(spec, f"spoof-{i:04d}", "spoof", True, _STREAM_SPOOF, i)
        for i in range(n_spoof_test)
    ]
    return enroll, test


def with_shift(spec: SynthSpec, impostor_shift: float | np.ndarray) -> SynthSpec:
    """Copy of the spec with a different impostor shift (same voices and seed)."""
    return replace(spec, impostor_shift=impostor_shift)
