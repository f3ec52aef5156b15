"""Closed-form fidelity analysis.

Central quantities, all functions of a distance threshold ``d0``:

* ``n1`` -- total received power of the true channels a threshold ``d0``
  throws away.  Decreases in ``d0`` and vanishes at the disc radius.
* ``n2`` -- total power of the estimation error the threshold retains.
  Increases in ``d0``; its per-entry variance depends on the estimator
  (LS vs MMSE shrinkage) and on whether training is orthogonal.
* ``fidelity_lower_bound`` -- the tractable lower bound on the ratio of
  the expected detection SINR with sparsified, imperfectly estimated
  channels to the expected SINR with the full, perfectly known matrix:
  ``(retained_gain / mean_gain) * N0 / (N0 + n1 + n2)``.
* ``objective_parts`` -- the numerator/denominator pair ``(F1, F2)`` of
  the fractional program whose maximizer is the optimal threshold;
  ``F1/F2`` is the bound scaled by a positive constant.
* ``stationarity_value`` -- the function whose unique root on ``(r0, r]``
  (when one exists) is the bound's maximizer, for the disc-approximation
  distance law.
* ``dnc_threshold`` -- the closed-form threshold of the dynamic-nested-
  clustering baseline, which inverts the perfect-CSI bound at a target
  fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .channel import Estimator, PilotKind, PilotScheme, base_error_variance
from .errors import ConfigurationError, DomainError, NumericalError
from .geometry import DistancePdf, NetworkConfig, PdfKind, expected_gain, sparsification_mass, support_mass

__all__ = [
    "BoundInputs",
    "StationarityCoefficients",
    "DncThreshold",
    "mean_gain",
    "retained_gain",
    "retained_error_variance",
    "n1",
    "n2",
    "fidelity_lower_bound",
    "objective_parts",
    "stationarity_value",
    "dnc_threshold",
]


@dataclass(frozen=True)
class BoundInputs:
    """Everything the closed forms need: scenario, distance law, estimator."""

    cfg: NetworkConfig
    pdf: DistancePdf
    estimator: Estimator = Estimator.LS
    pilot_kind: PilotKind = PilotKind.ORTHOGONAL

    def __post_init__(self):
        cfg = self.cfg
        if self.pilot_kind is PilotKind.ORTHOGONAL and cfg.training_len < cfg.num_ue:
            raise ConfigurationError(
                f"orthogonal training needs training_len >= num_ue "
                f"({cfg.training_len} < {cfg.num_ue})"
            )
        # training_len == num_ue is allowed here: the contamination term is
        # exactly zero there and the formulas coincide with the orthogonal ones.
        if self.pilot_kind is PilotKind.NON_ORTHOGONAL and cfg.training_len > cfg.num_ue:
            raise ConfigurationError(
                f"non-orthogonal training needs training_len <= num_ue "
                f"({cfg.training_len} > {cfg.num_ue})"
            )
        if self.estimator is Estimator.MMSE and self.pilot_kind is PilotKind.NON_ORTHOGONAL:
            raise ConfigurationError(
                "MMSE shrinkage is defined here only for orthogonal training"
            )

    def pilot_scheme(self) -> PilotScheme:
        return PilotScheme(
            kind=self.pilot_kind,
            training_len=self.cfg.training_len,
            total_power=self.cfg.pilot_power_total,
        )


@lru_cache(maxsize=256)
def mean_gain(pdf: DistancePdf, cfg: NetworkConfig) -> float:
    """Average squared channel amplitude of a random link."""
    return float(expected_gain(pdf, cfg, cfg.min_dist_m, cfg.radius_m))


def retained_gain(inputs: BoundInputs, d0):
    """Average squared amplitude surviving a threshold ``d0``."""
    return expected_gain(inputs.pdf, inputs.cfg, inputs.cfg.min_dist_m, d0)


def retained_error_variance(inputs: BoundInputs) -> float:
    """Per-entry variance of the estimation error under ``inputs``."""
    cfg = inputs.cfg
    noise_var = base_error_variance(
        inputs.pilot_scheme(), cfg.num_ue, cfg.est_error_variance
    )
    mu = mean_gain(inputs.pdf, cfg)
    if inputs.estimator is Estimator.MMSE:
        noise_var *= (mu / (mu + cfg.noise_power)) ** 2
    if inputs.pilot_kind is PilotKind.NON_ORTHOGONAL:
        noise_var += 2.0 * (1.0 - cfg.training_len / cfg.num_ue) * mu
    return noise_var


def _check_threshold(cfg: NetworkConfig, d0) -> np.ndarray:
    d0_arr = np.asarray(d0, dtype=float)
    if np.any(d0_arr < cfg.min_dist_m) or np.any(d0_arr > cfg.radius_m):
        raise DomainError(
            f"threshold outside [{cfg.min_dist_m}, {cfg.radius_m}]"
        )
    return d0_arr


def n1(inputs: BoundInputs, d0):
    """Aggregate power of the channel entries a threshold ``d0`` discards."""
    _check_threshold(inputs.cfg, d0)
    mu = mean_gain(inputs.pdf, inputs.cfg)
    return inputs.cfg.total_data_power * (mu - retained_gain(inputs, d0))


def n2(inputs: BoundInputs, d0):
    """Aggregate power of the estimation error a threshold ``d0`` retains."""
    _check_threshold(inputs.cfg, d0)
    mass = sparsification_mass(inputs.pdf, inputs.cfg, d0)
    return retained_error_variance(inputs) * inputs.cfg.total_data_power * mass


def fidelity_lower_bound(inputs: BoundInputs, d0):
    """Lower bound on the SINR fidelity at threshold ``d0``; lies in (0, 1]."""
    cfg = inputs.cfg
    mu = mean_gain(inputs.pdf, cfg)
    ratio = retained_gain(inputs, d0) / mu
    return ratio * cfg.noise_power / (cfg.noise_power + n1(inputs, d0) + n2(inputs, d0))


def objective_parts(inputs: BoundInputs, d0):
    """Numerator and denominator ``(F1, F2)`` of the fractional objective.

    ``F1/F2`` equals the fidelity bound times the positive constant
    ``mean_gain / support_mass``, so both have the same maximizer.
    """
    cfg = inputs.cfg
    f1 = cfg.noise_power * retained_gain(inputs, d0)
    f2 = support_mass(inputs.pdf, cfg) * (
        cfg.noise_power + n1(inputs, d0) + n2(inputs, d0)
    )
    return f1, f2


@dataclass(frozen=True)
class StationarityCoefficients:
    """Coefficients of the bound's stationarity polynomial (disc law only).

    For any valid configuration with path-loss exponent above 2:
    ``a_coef < 0``, ``b_coef < 0``, ``c_coef > 0``.
    """

    a_coef: float
    b_coef: float
    c_coef: float

    @staticmethod
    def from_inputs(inputs: BoundInputs) -> "StationarityCoefficients":
        if inputs.pdf.kind is not PdfKind.DISC_APPROX:
            raise DomainError(
                "stationarity coefficients are defined for the disc approximation only"
            )
        cfg = inputs.cfg
        r, r0, alpha = cfg.radius_m, cfg.min_dist_m, cfg.alpha
        p_avg = cfg.total_data_power / cfg.num_ue
        a = cfg.noise_power / (
            2.0 * (r ** (2 - alpha) - r0 ** (2 - alpha)) + (2 - alpha) * r0 ** (2 - alpha)
        )
        b = 2.0 * p_avg * cfg.num_ue / ((2 - alpha) * r**2)
        c = retained_error_variance(inputs) * cfg.total_data_power / r**2
        return StationarityCoefficients(a_coef=a, b_coef=b, c_coef=c)


def stationarity_value(inputs: BoundInputs, d0):
    """Signed slope surrogate of the bound at ``d0`` (disc law).

    Positive where the bound increases, negative where it decreases; it is
    strictly decreasing on ``(r0, r)``, so its sign changes at most once
    and the bound has a single maximum.
    """
    cfg = inputs.cfg
    d0_arr = _check_threshold(cfg, d0)
    coef = StationarityCoefficients.from_inputs(inputs)
    r, r0, alpha = cfg.radius_m, cfg.min_dist_m, cfg.alpha
    a, b, c = coef.a_coef, coef.b_coef, coef.c_coef
    lead = (2 - alpha) * a * (
        2.0 * cfg.noise_power + 2.0 * b * r ** (2 - alpha) - alpha * b * r0 ** (2 - alpha)
    )
    out = lead * d0_arr ** (1 - alpha) + 2.0 * alpha * a * c * (
        r0 ** (2 - alpha) * d0_arr - d0_arr ** (3 - alpha)
    )
    return out if out.ndim else float(out)


class DncThreshold(NamedTuple):
    threshold: float
    clamped: bool


def dnc_threshold(cfg: NetworkConfig, target_fidelity: float) -> DncThreshold:
    """Distance threshold of the dynamic-nested-clustering baseline.

    Inverts the perfect-CSI fidelity bound (no estimation error) at the
    requested fidelity, assuming the disc-approximation distance law and
    equal per-user power.  The raw value is clamped to ``[r0, r]``; the
    flag reports whether clamping occurred.
    """
    if not (0.0 < target_fidelity < 1.0):
        raise DomainError(f"target fidelity must lie in (0, 1), got {target_fidelity}")
    r, r0, alpha = cfg.radius_m, cfg.min_dist_m, cfg.alpha
    p_avg = cfg.total_data_power / cfg.num_ue
    spread = alpha * r0 ** (2 - alpha) - 2.0 * r ** (2 - alpha)
    numerator = spread * (1.0 - target_fidelity) * cfg.noise_power
    denominator = 2.0 * cfg.noise_power + (
        2.0 * target_fidelity * spread * (cfg.num_ue - 1) * p_avg
    ) / ((alpha - 2.0) * r**2)
    if denominator <= 0.0:
        raise NumericalError(
            f"baseline threshold denominator is not positive ({denominator!r})"
        )
    base = r ** (2 - alpha) + numerator / denominator
    if base <= 0.0:
        raise NumericalError(f"baseline threshold radicand is not positive ({base!r})")
    raw = base ** (1.0 / (2.0 - alpha))
    clamped = raw < r0 or raw > r
    return DncThreshold(threshold=float(min(max(raw, r0), r)), clamped=clamped)
