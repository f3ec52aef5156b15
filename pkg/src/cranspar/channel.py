"""Channel synthesis, estimation-error surrogates, and distance sparsification.

The channel matrix is ``H = D (.) Gamma``: entrywise product of the
path-loss matrix ``d**(-alpha/2)`` and unit-variance circularly-symmetric
Gaussian fading.  Estimation is modeled at the statistical level: instead
of simulating pilot matrices, an additive error matrix with the
estimator's per-entry variance is drawn from a seed stream independent of
the fading.  That variance is exactly what the closed-form analysis
consumes, so simulation and analysis stay consistent by construction.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import Layout, _STREAM_ESTIMATION, _STREAM_FADING, substream

__all__ = [
    "Estimator",
    "PilotKind",
    "PilotScheme",
    "ChannelRealization",
    "EstimatedChannel",
    "base_error_variance",
    "build_channel",
    "estimate",
    "sparsify",
]


class Estimator(enum.Enum):
    LS = "ls"
    MMSE = "mmse"


class PilotKind(enum.Enum):
    ORTHOGONAL = "orthogonal"
    NON_ORTHOGONAL = "nonorthogonal"


@dataclass(frozen=True)
class PilotScheme:
    """Training configuration: orthogonal pilots need at least one symbol
    per user, the non-orthogonal surrogate models a shorter training block."""

    kind: PilotKind
    training_len: int
    total_power: float

    def __post_init__(self):
        if self.training_len < 1 or self.total_power <= 0:
            raise ConfigurationError("training_len must be >= 1 and total_power > 0")

    def validate_for(self, num_ue: int) -> None:
        if self.kind is PilotKind.ORTHOGONAL and self.training_len < num_ue:
            raise ConfigurationError(
                f"orthogonal pilots need training_len >= num_ue "
                f"({self.training_len} < {num_ue})"
            )
        if self.kind is PilotKind.NON_ORTHOGONAL and self.training_len >= num_ue:
            raise ConfigurationError(
                f"non-orthogonal surrogate needs training_len < num_ue "
                f"({self.training_len} >= {num_ue})"
            )


@dataclass(frozen=True)
class ChannelRealization:
    layout: Layout
    fading: np.ndarray
    channel: np.ndarray
    alpha: float


@dataclass(frozen=True)
class EstimatedChannel:
    """Observed channel after estimation and sparsification.

    ``observed = sparse_true + sparse_error`` entrywise, and
    ``sparse_true + truncated_true`` recovers the exact channel.
    ``discarded_error`` is the error mass removed by the mask, kept only
    so the decomposition identities can be checked.
    """

    observed: np.ndarray
    mask: np.ndarray
    sparse_true: np.ndarray
    truncated_true: np.ndarray
    sparse_error: np.ndarray
    discarded_error: np.ndarray
    threshold: float
    estimator: Estimator


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian draws."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def build_channel(layout: Layout, alpha: float, seed: int) -> ChannelRealization:
    """Draw flat Rayleigh fading and combine it with the path loss."""
    rng = substream(seed, _STREAM_FADING)
    fading = _complex_normal(rng, layout.distances.shape)
    channel = layout.distances ** (-alpha / 2.0) * fading
    return ChannelRealization(layout=layout, fading=fading, channel=channel, alpha=alpha)


def base_error_variance(
    pilots: PilotScheme, num_ue: int, override: float | None = None
) -> float:
    """Per-entry variance of the pilot-noise part of the estimation error.

    Defaults to ``num_ue**2 / (training_len * total_power)``; an explicit
    override replaces it (the closed forms use the same value, so the two
    stay in lockstep).
    """
    if override is not None:
        return float(override)
    return num_ue**2 / (pilots.training_len * pilots.total_power)


def estimate(
    chan: ChannelRealization,
    pilots: PilotScheme,
    estimator: Estimator,
    noise_power: float,
    seed: int,
    *,
    mean_gain: float,
    error_variance: float | None = None,
) -> np.ndarray:
    """Synthesize the estimation-error matrix ``E`` (so ``H_est = H + E``).

    Orthogonal training draws i.i.d. complex Gaussian noise with the
    estimator's per-entry variance; the MMSE estimator shrinks the same
    draw by ``mean_gain / (mean_gain + noise_power)``.  The non-orthogonal
    surrogate adds an independent contamination term whose variance is
    ``2 * (1 - training_len/num_ue) * mean_gain``.

    ``mean_gain`` is the average squared channel amplitude of a random
    link under the configured distance law.
    """
    num_rrh, num_ue = chan.channel.shape
    pilots.validate_for(num_ue)

    rng = substream(seed, _STREAM_ESTIMATION)
    noise_var = base_error_variance(pilots, num_ue, error_variance)
    error = np.sqrt(noise_var) * _complex_normal(rng, (num_rrh, num_ue))
    if estimator is Estimator.MMSE:
        if pilots.kind is PilotKind.NON_ORTHOGONAL:
            raise ConfigurationError(
                "MMSE shrinkage is defined here only for orthogonal training"
            )
        error = error * (mean_gain / (mean_gain + noise_power))
    if pilots.kind is PilotKind.NON_ORTHOGONAL:
        pc_factor = 2.0 * (1.0 - pilots.training_len / num_ue)
        if pc_factor > 1.0:
            warnings.warn(
                "contamination probability factor exceeds 1 "
                f"(training_len={pilots.training_len}, num_ue={num_ue}); "
                "the surrogate is evaluated as written",
                stacklevel=2,
            )
        contamination = np.sqrt(pc_factor * mean_gain) * _complex_normal(
            rng, (num_rrh, num_ue)
        )
        error = error + contamination
    return error


def sparsify(
    chan: ChannelRealization,
    error: np.ndarray,
    d0: float,
    estimator: Estimator = Estimator.LS,
) -> EstimatedChannel:
    """Zero every observed entry whose link distance exceeds ``d0``.

    ``d0`` equal to the disc radius means "no sparsification": the mask is
    all-true even for the minority of sampled pairs whose distance exceeds
    the radius (the distance law models the radius as the largest relevant
    link length).
    """
    layout = chan.layout
    if not (layout.min_dist_m <= d0 <= layout.radius_m):
        raise DomainError(
            f"threshold {d0} outside [{layout.min_dist_m}, {layout.radius_m}]"
        )
    if d0 == layout.radius_m:
        mask = np.ones_like(layout.distances, dtype=bool)
    else:
        mask = layout.distances <= d0
    return EstimatedChannel(
        observed=np.where(mask, chan.channel + error, 0.0),
        mask=mask,
        sparse_true=np.where(mask, chan.channel, 0.0),
        truncated_true=np.where(mask, 0.0, chan.channel),
        sparse_error=np.where(mask, error, 0.0),
        discarded_error=np.where(mask, 0.0, error),
        threshold=float(d0),
        estimator=estimator,
    )
