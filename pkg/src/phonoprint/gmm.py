"""Diagonal-covariance Gaussian mixtures: density evaluation and EM fitting.

Fitting is fully deterministic for a given config seed: centers are seeded
with k-means++ from a ``numpy`` Generator, EM runs single-threaded, and the
variance floor (``config.covariance_regularization``) is both added to every
M-step variance estimate and enforced as a hard lower bound, which keeps
components non-singular even on a handful of samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .config import Config
from .errors import PreconditionError

_LOG_2PI = float(np.log(2.0 * np.pi))

# Responsibility mass below this reseeds a component to the worst-explained sample.
_EMPTY_COMPONENT_MASS = 1e-10


@dataclass(frozen=True, eq=False)
class DiagonalGmm:
    """Mixture weights, component means and per-dimension variances."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.means, dtype=np.float64)
        var = np.asarray(self.variances, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] < 1:
            raise PreconditionError("weights must be a non-empty vector")
        k = w.shape[0]
        if mu.ndim != 2 or mu.shape[0] != k or mu.shape[1] < 1:
            raise PreconditionError(f"means must be K x D, got shape {mu.shape}")
        if var.shape != mu.shape:
            raise PreconditionError(f"variances shape {var.shape} != means shape {mu.shape}")
        if not (np.isfinite(w).all() and np.isfinite(mu).all() and np.isfinite(var).all()):
            raise PreconditionError("mixture parameters must be finite")
        if (w < 0).any():
            raise PreconditionError("mixture weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise PreconditionError(f"mixture weights must sum to 1, got {w.sum()!r}")
        if (var <= 0).any():
            raise PreconditionError("variances must be positive")
        for name, arr in (("weights", w), ("means", mu), ("variances", var)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiagonalGmm):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.variances, other.variances)
        )


def _component_log_densities(model: DiagonalGmm, x: np.ndarray) -> np.ndarray:
    """Per-component log densities plus log weights, shape (N, K)."""
    # log N(x | mu_k, diag var_k) = -0.5 * (D log 2pi + sum log var + sum (x-mu)^2/var)
    log_det = np.log(model.variances).sum(axis=1)
    diff = x[:, None, :] - model.means[None, :, :]
    mahal = (diff * diff / model.variances[None, :, :]).sum(axis=2)
    log_norm = -0.5 * (model.dim * _LOG_2PI + log_det)
    with np.errstate(divide="ignore"):
        log_w = np.log(model.weights)
    return log_w[None, :] + log_norm[None, :] - 0.5 * mahal


def log_density_many(model: DiagonalGmm, x: np.ndarray) -> np.ndarray:
    """Log mixture density of each row of ``x`` (N x D), via log-sum-exp."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise PreconditionError(f"expected N x {model.dim} input, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise PreconditionError("non-finite input vector")
    return logsumexp(_component_log_densities(model, x), axis=1)


def log_density(model: DiagonalGmm, v: np.ndarray) -> float:
    """Log mixture density of a single vector."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise PreconditionError("input vector must be 1-D")
    return float(log_density_many(model, v[None, :])[0])


@dataclass(frozen=True)
class FitResult:
    """Fitted model plus the total log-likelihood after each EM iteration."""

    model: DiagonalGmm
    log_likelihoods: tuple[float, ...]


def _kmeanspp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:  # unreachable while k <= number of distinct samples
            centers[i] = x[rng.integers(n)]
            continue
        idx = rng.choice(n, p=d2 / total)
        centers[i] = x[idx]
        d2 = np.minimum(d2, ((x - centers[i]) ** 2).sum(axis=1))
    return centers


def _initial_model(x: np.ndarray, k: int, floor: float, rng: np.random.Generator) -> DiagonalGmm:
    centers = _kmeanspp_centers(x, k, rng)
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    means = np.empty_like(centers)
    variances = np.empty_like(centers)
    for j in range(k):
        members = x[assign == j]
        if members.shape[0] == 0:
            members = centers[j : j + 1]
        means[j] = members.mean(axis=0)
        variances[j] = np.maximum(members.var(axis=0) + floor, floor)
    weights = np.full(k, 1.0 / k)
    return DiagonalGmm(weights=weights, means=means, variances=variances)


def fit_em(samples, components: int, config: Config) -> FitResult:
    """Fit a diagonal GMM by EM and return it with the per-iteration likelihood trace.

    The effective component count is ``min(components, number of distinct
    samples)``. Components whose responsibility mass collapses are reseeded to
    the sample with the lowest current density.
    """
    try:
        x = np.asarray(samples, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise PreconditionError(f"samples must form an N x D matrix: {exc}") from exc
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise PreconditionError("need at least one sample vector")
    if not np.isfinite(x).all():
        raise PreconditionError("non-finite sample")
    if components < 1:
        raise PreconditionError(f"components must be >= 1, got {components}")

    n = x.shape[0]
    n_distinct = np.unique(x, axis=0).shape[0]
    k = min(components, n_distinct)
    floor = config.covariance_regularization
    rng = np.random.default_rng(config.rng_seed)

    model = _initial_model(x, k, floor, rng)
    history: list[float] = []
    prev_ll = -np.inf
    for _ in range(config.em_max_iterations):
        comp_ll = _component_log_densities(model, x)
        sample_ll = logsumexp(comp_ll, axis=1)
        total_ll = float(sample_ll.sum())
        history.append(total_ll)
        if np.isfinite(prev_ll) and total_ll - prev_ll < config.em_tolerance * abs(prev_ll):
            break
        prev_ll = total_ll

        resp = np.exp(comp_ll - sample_ll[:, None])
        mass = resp.sum(axis=0)
        starved = np.flatnonzero(mass < _EMPTY_COMPONENT_MASS)
        if starved.size:
            worst = np.argsort(sample_ll)
            for rank, j in enumerate(starved):
                i = worst[rank % n]
                resp[i, :] = 0.0
                resp[i, j] = 1.0
            mass = resp.sum(axis=0)

        weights = mass / mass.sum()
        means = (resp.T @ x) / mass[:, None]
        sq_dev = np.empty_like(means)
        for j in range(k):
            diff = x - means[j]
            sq_dev[j] = (resp[:, j : j + 1] * diff * diff).sum(axis=0)
        variances = np.maximum(sq_dev / mass[:, None] + floor, floor)
        model = DiagonalGmm(weights=weights, means=means, variances=variances)

    return FitResult(model=model, log_likelihoods=tuple(history))


def fit(samples, components: int, config: Config) -> DiagonalGmm:
    """Convenience wrapper around :func:`fit_em` returning only the model."""
    return fit_em(samples, components, config).model
