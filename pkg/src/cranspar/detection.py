"""MMSE detection and the Monte Carlo estimate of SINR fidelity.

Two detectors per realization: one built from the sparsified, imperfect
channel estimate (with diagonal loading for the truncated-channel and
estimation-error power), one from the full true channel.  The fidelity
estimate divides the mean detected SINR of the first by that of the
second -- a ratio of means over trials and users, never a mean of
per-trial ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from threadpoolctl import threadpool_limits

from . import analysis
from .channel import (
    ChannelRealization,
    EstimatedChannel,
    Estimator,
    PilotScheme,
    build_channel,
    estimate,
    sparsify,
)
from .errors import NumericalError
from .geometry import DistancePdf, NetworkConfig, sample_layout

__all__ = [
    "DetectorBundle",
    "FidelityEstimate",
    "build_detectors",
    "sinr_sparse",
    "sinr_full",
    "fidelity_empirical",
]

_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class DetectorBundle:
    """Per-user receive vectors for the sparse and the full channel."""

    sparse_detector: np.ndarray
    full_detector: np.ndarray
    floor_n1: float
    floor_n2: float


@dataclass(frozen=True)
class FidelityEstimate:
    d0: float
    mean_sparse_sinr: float
    mean_full_sinr: float
    fidelity: float
    stderr: float
    trials: int


def _solve_detector(gram_plus_floor: np.ndarray, scaled_channel: np.ndarray) -> np.ndarray:
    """Solve the regularized system column-wise via Cholesky.

    Never forms an explicit inverse; raises with a condition estimate if
    the factorization fails or the residual is out of tolerance.
    """
    try:
        factor = sla.cho_factor(gram_plus_floor, lower=True, check_finite=False)
        detector = sla.cho_solve(factor, scaled_channel, check_finite=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise NumericalError(
            "detector system is singular beyond its diagonal loading",
            condition_estimate=float(np.linalg.cond(gram_plus_floor)),
        ) from exc
    residual = gram_plus_floor @ detector - scaled_channel
    res_norm = np.linalg.norm(residual, axis=0)
    rhs_norm = np.linalg.norm(scaled_channel, axis=0)
    bad = res_norm > _RESIDUAL_TOL * np.maximum(rhs_norm, np.finfo(float).tiny)
    if np.any(bad & (rhs_norm > 0)):
        raise NumericalError(
            "detector solve residual exceeds tolerance",
            condition_estimate=float(np.linalg.cond(gram_plus_floor)),
        )
    return detector


def build_detectors(
    chan: ChannelRealization,
    est: EstimatedChannel,
    cfg: NetworkConfig,
    n1: float,
    n2: float,
) -> DetectorBundle:
    """Build both linear MMSE receivers.

    The sparse receiver regularizes with ``n1 + n2 + noise``: the average
    power of the discarded channels and retained errors enters as a
    diagonal floor in place of their (unknown) covariance.
    """
    if n1 < 0 or n2 < 0:
        raise NumericalError("diagonal loading terms must be nonnegative")
    num_rrh = chan.channel.shape[0]
    powers = np.asarray(cfg.data_power)
    sqrt_p = np.sqrt(powers)
    eye = np.eye(num_rrh)

    observed = est.observed
    gram_sparse = (observed * powers) @ observed.conj().T + (
        n1 + n2 + cfg.noise_power
    ) * eye
    sparse_detector = _solve_detector(gram_sparse, observed * sqrt_p)

    gram_full = (chan.channel * powers) @ chan.channel.conj().T + cfg.noise_power * eye
    full_detector = _solve_detector(gram_full, chan.channel * sqrt_p)

    return DetectorBundle(
        sparse_detector=sparse_detector,
        full_detector=full_detector,
        floor_n1=float(n1),
        floor_n2=float(n2),
    )


def _sinr_sparse_all(
    chan: ChannelRealization,
    est: EstimatedChannel,
    bundle: DetectorBundle,
    cfg: NetworkConfig,
) -> np.ndarray:
    """Detected SINR of every user with the sparse receiver."""
    powers = np.asarray(cfg.data_power)
    v = bundle.sparse_detector
    cross = v.conj().T @ chan.channel  # entry (k, j) = v_k^H h_j
    signal = powers * np.abs(np.einsum("nk,nk->k", v.conj(), est.observed)) ** 2
    leak = est.truncated_true - est.sparse_error
    self_interf = powers * np.abs(np.einsum("nk,nk->k", v.conj(), leak)) ** 2
    cross_power = np.abs(cross) ** 2 * powers[None, :]
    other_interf = cross_power.sum(axis=1) - np.diagonal(cross_power)
    noise = cfg.noise_power * np.einsum("nk,nk->k", v.conj(), v).real
    denom = self_interf + other_interf + noise
    return np.divide(signal, denom, out=np.zeros_like(signal), where=denom > 0)


def _sinr_full_all(
    chan: ChannelRealization, bundle: DetectorBundle, cfg: NetworkConfig
) -> np.ndarray:
    powers = np.asarray(cfg.data_power)
    v = bundle.full_detector
    cross = v.conj().T @ chan.channel
    cross_power = np.abs(cross) ** 2 * powers[None, :]
    signal = np.diagonal(cross_power).copy()
    other_interf = cross_power.sum(axis=1) - signal
    noise = cfg.noise_power * np.einsum("nk,nk->k", v.conj(), v).real
    denom = other_interf + noise
    return np.divide(signal, denom, out=np.zeros_like(signal), where=denom > 0)


def sinr_sparse(
    k: int,
    chan: ChannelRealization,
    est: EstimatedChannel,
    bundle: DetectorBundle,
    cfg: NetworkConfig,
) -> float:
    """Detected SINR of user ``k`` under sparsified, imperfect knowledge.

    A user whose observed column is entirely zeroed captures no signal;
    its SINR is reported as 0.
    """
    return float(_sinr_sparse_all(chan, est, bundle, cfg)[k])


def sinr_full(
    k: int, chan: ChannelRealization, bundle: DetectorBundle, cfg: NetworkConfig
) -> float:
    """Detected SINR of user ``k`` with full, perfect channel knowledge."""
    return float(_sinr_full_all(chan, bundle, cfg)[k])


def trial_seed(seed: int, trial: int) -> int:
    """Collision-resistant integer seed for one trial of a run."""
    state = np.random.SeedSequence((int(seed), int(trial))).generate_state(2)
    return int(state[0]) << 32 | int(state[1])


def trial_sinr_means(
    cfg: NetworkConfig,
    pdf: DistancePdf,
    d0: float,
    estimator: Estimator,
    pilots: PilotScheme,
    seed: int,
    trial: int,
) -> tuple[float, float]:
    """User-averaged (sparse, full) SINR of one independent trial."""
    tseed = trial_seed(seed, trial)
    layout = sample_layout(cfg, tseed)
    chan = build_channel(layout, cfg.alpha, tseed)
    mu = analysis.mean_gain(pdf, cfg)
    error = estimate(
        chan,
        pilots,
        estimator,
        cfg.noise_power,
        tseed,
        mean_gain=mu,
        error_variance=cfg.est_error_variance,
    )
    est = sparsify(chan, error, d0, estimator)
    inputs = analysis.BoundInputs(cfg, pdf, estimator, pilots.kind)
    bundle = build_detectors(
        chan, est, cfg, analysis.n1(inputs, d0), analysis.n2(inputs, d0)
    )
    sparse_mean = float(np.mean(_sinr_sparse_all(chan, est, bundle, cfg)))
    full_mean = float(np.mean(_sinr_full_all(chan, bundle, cfg)))
    return sparse_mean, full_mean


def fidelity_empirical(
    cfg: NetworkConfig,
    pdf: DistancePdf,
    d0: float,
    estimator: Estimator,
    pilots: PilotScheme,
    trials: int,
    seed: int,
) -> FidelityEstimate:
    """Monte Carlo fidelity at threshold ``d0``.

    Each trial draws a fresh layout, fading, and estimation error, then
    averages per-user SINRs.  The estimate is the ratio of the two trial
    means; its standard error propagates both trial variances and their
    covariance (delta method).
    """
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard error")
    sparse = np.empty(trials)
    full = np.empty(trials)
    # Single-threaded BLAS: trial matrices are small enough that threading
    # only adds jitter, and serial reduction keeps results bit-identical.
    with threadpool_limits(limits=1):
        for t in range(trials):
            sparse[t], full[t] = trial_sinr_means(cfg, pdf, d0, estimator, pilots, seed, t)
    return _combine_trials(d0, sparse, full)


def _combine_trials(d0: float, sparse: np.ndarray, full: np.ndarray) -> FidelityEstimate:
    trials = sparse.size
    mean_sparse = float(np.mean(sparse))
    mean_full = float(np.mean(full))
    fidelity = mean_sparse / mean_full
    var_sparse = float(np.var(sparse, ddof=1)) / trials
    var_full = float(np.var(full, ddof=1)) / trials
    cov = float(np.cov(sparse, full, ddof=1)[0, 1]) / trials
    if mean_sparse == 0.0:
        stderr = float(np.sqrt(var_sparse)) / mean_full
    else:
        rel_var = (
            var_sparse / mean_sparse**2
            + var_full / mean_full**2
            - 2.0 * cov / (mean_sparse * mean_full)
        )
        stderr = abs(fidelity) * float(np.sqrt(max(rel_var, 0.0)))
    return FidelityEstimate(
        d0=float(d0),
        mean_sparse_sinr=mean_sparse,
        mean_full_sinr=mean_full,
        fidelity=fidelity,
        stderr=stderr,
        trials=trials,
    )
