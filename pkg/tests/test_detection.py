"""Detectors, per-user SINR, and the Monte Carlo fidelity estimate."""

import numpy as np
import pytest

from cranspar import analysis
from cranspar.channel import (
    ChannelRealization,
    Estimator,
    PilotKind,
    PilotScheme,
    build_channel,
    estimate,
    sparsify,
)
from cranspar.detection import (
    _sinr_full_all,
    _sinr_sparse_all,
    build_detectors,
    fidelity_empirical,
    sinr_full,
    sinr_sparse,
)
from cranspar.geometry import DistancePdf, Layout, NetworkConfig, sample_layout

DISC = DistancePdf.disc_approx()


def make_cfg(**overrides) -> NetworkConfig:
    base = dict(
        radius_m=5000.0,
        min_dist_m=10.0,
        alpha=3.8,
        num_rrh=40,
        num_ue=30,
        data_power=10 ** 2.3,
        pilot_power_total=1e13,
        noise_power=10 ** -7.85,
        training_len=30,
    )
    base.update(overrides)
    return NetworkConfig(**base)


def scalar_instance():
    """One radio head, one user, unit channel: everything solvable by hand."""
    cfg = NetworkConfig(
        radius_m=100.0,
        min_dist_m=1.0,
        alpha=3.8,
        num_rrh=1,
        num_ue=1,
        data_power=1.0,
        pilot_power_total=1.0,
        noise_power=1.0,
        training_len=1,
    )
    layout = Layout(
        rrh_xy=np.zeros((1, 2)),
        ue_xy=np.zeros((1, 2)),
        distances=np.ones((1, 1)),
        radius_m=100.0,
        min_dist_m=1.0,
    )
    chan = ChannelRealization(
        layout=layout,
        fading=np.ones((1, 1), dtype=complex),
        channel=np.ones((1, 1), dtype=complex),
        alpha=0.0,
    )
    return cfg, chan


def zero_error_setup(cfg, seed):
    layout = sample_layout(cfg, seed)
    chan = build_channel(layout, cfg.alpha, seed)
    est = sparsify(chan, np.zeros_like(chan.channel), cfg.radius_m)
    return chan, est


class TestBuildDetectors:
    def test_scalar_receive_vector_by_hand(self):
        # (h P h^H + N0)^-1 sqrt(P) h with h = P = N0 = 1 gives 1/2.
        cfg, chan = scalar_instance()
        est = sparsify(chan, np.zeros((1, 1), dtype=complex), cfg.radius_m)
        bundle = build_detectors(chan, est, cfg, n1=0.0, n2=0.0)
        assert bundle.full_detector[0, 0] == pytest.approx(0.5, rel=1e-12)
        assert bundle.sparse_detector[0, 0] == pytest.approx(0.5, rel=1e-12)

    def test_detectors_coincide_without_error_or_floors(self):
        cfg = make_cfg()
        chan, est = zero_error_setup(cfg, seed=21)
        bundle = build_detectors(chan, est, cfg, n1=0.0, n2=0.0)
        np.testing.assert_allclose(
            bundle.sparse_detector, bundle.full_detector, rtol=0, atol=1e-9
        )

    def test_residual_bound_across_seeds(self):
        # The solver asserts its own per-column residual bound; exercise it
        # across many desk-scale realizations.
        cfg = make_cfg(num_rrh=100, num_ue=80, training_len=80)
        pilots = PilotScheme(PilotKind.ORTHOGONAL, 80, cfg.pilot_power_total)
        mu = analysis.mean_gain(DISC, cfg)
        inputs = analysis.BoundInputs(cfg, DISC)
        floors = (float(analysis.n1(inputs, 1500.0)), float(analysis.n2(inputs, 1500.0)))
        for seed in range(100):
            layout = sample_layout(cfg, seed)
            chan = build_channel(layout, cfg.alpha, seed)
            error = estimate(
                chan, pilots, Estimator.LS, cfg.noise_power, seed, mean_gain=mu
            )
            est = sparsify(chan, error, 1500.0)
            build_detectors(chan, est, cfg, *floors)


class TestSinr:
    def test_scalar_case_equals_one(self):
        # Signal (1/2)^2, noise 1 * (1/2)^2: SINR exactly 1.
        cfg, chan = scalar_instance()
        est = sparsify(chan, np.zeros((1, 1), dtype=complex), cfg.radius_m)
        bundle = build_detectors(chan, est, cfg, 0.0, 0.0)
        assert sinr_full(0, chan, bundle, cfg) == pytest.approx(1.0, rel=1e-12)
        assert sinr_sparse(0, chan, est, bundle, cfg) == pytest.approx(1.0, rel=1e-12)

    def test_sparse_equals_full_without_error(self):
        cfg = make_cfg()
        chan, est = zero_error_setup(cfg, seed=4)
        bundle = build_detectors(chan, est, cfg, 0.0, 0.0)
        for k in range(cfg.num_ue):
            assert sinr_sparse(k, chan, est, bundle, cfg) == pytest.approx(
                sinr_full(k, chan, bundle, cfg), rel=1e-12
            )

    def test_scale_invariance(self):
        # Scaling every data power and the noise by one factor leaves the
        # SINR untouched once the floors scale along.
        cfg = make_cfg()
        scale = 7.0
        scaled = NetworkConfig(
            radius_m=cfg.radius_m,
            min_dist_m=cfg.min_dist_m,
            alpha=cfg.alpha,
            num_rrh=cfg.num_rrh,
            num_ue=cfg.num_ue,
            data_power=tuple(scale * p for p in cfg.data_power),
            pilot_power_total=cfg.pilot_power_total,
            noise_power=scale * cfg.noise_power,
            training_len=cfg.training_len,
        )
        layout = sample_layout(cfg, 8)
        chan = build_channel(layout, cfg.alpha, 8)
        pilots = PilotScheme(PilotKind.ORTHOGONAL, cfg.training_len, cfg.pilot_power_total)
        mu = analysis.mean_gain(DISC, cfg)
        error = estimate(chan, pilots, Estimator.LS, cfg.noise_power, 8, mean_gain=mu)
        est = sparsify(chan, error, 2000.0)
        base_inputs = analysis.BoundInputs(cfg, DISC)
        floors = (float(analysis.n1(base_inputs, 2000.0)), float(analysis.n2(base_inputs, 2000.0)))
        bundle = build_detectors(chan, est, cfg, *floors)
        bundle_scaled = build_detectors(
            chan, est, scaled, scale * floors[0], scale * floors[1]
        )
        base_vals = _sinr_sparse_all(chan, est, bundle, cfg)
        scaled_vals = _sinr_sparse_all(chan, est, bundle_scaled, scaled)
        np.testing.assert_allclose(scaled_vals, base_vals, rtol=1e-9)
        np.testing.assert_allclose(
            _sinr_full_all(chan, bundle_scaled, scaled),
            _sinr_full_all(chan, bundle, cfg),
            rtol=1e-9,
        )

    def test_noise_dominates_limit(self):
        cfg = make_cfg()
        chan, est = zero_error_setup(cfg, seed=5)
        loud = NetworkConfig(
            radius_m=cfg.radius_m,
            min_dist_m=cfg.min_dist_m,
            alpha=cfg.alpha,
            num_rrh=cfg.num_rrh,
            num_ue=cfg.num_ue,
            data_power=cfg.data_power,
            pilot_power_total=cfg.pilot_power_total,
            noise_power=1e18,
            training_len=cfg.training_len,
        )
        bundle = build_detectors(chan, est, loud, 0.0, 0.0)
        assert all(sinr_full(k, chan, bundle, loud) < 1e-12 for k in range(cfg.num_ue))

    def test_user_permutation_permutes_sinr(self):
        cfg = make_cfg()
        layout = sample_layout(cfg, 12)
        chan = build_channel(layout, cfg.alpha, 12)
        est = sparsify(chan, np.zeros_like(chan.channel), cfg.radius_m)
        bundle = build_detectors(chan, est, cfg, 0.0, 0.0)
        base = _sinr_full_all(chan, bundle, cfg)

        perm = np.random.default_rng(0).permutation(cfg.num_ue)
        layout_p = Layout(
            rrh_xy=layout.rrh_xy,
            ue_xy=layout.ue_xy[perm],
            distances=layout.distances[:, perm],
            radius_m=layout.radius_m,
            min_dist_m=layout.min_dist_m,
        )
        chan_p = ChannelRealization(
            layout=layout_p,
            fading=chan.fading[:, perm],
            channel=chan.channel[:, perm],
            alpha=chan.alpha,
        )
        est_p = sparsify(chan_p, np.zeros_like(chan_p.channel), cfg.radius_m)
        bundle_p = build_detectors(chan_p, est_p, cfg, 0.0, 0.0)
        permuted = _sinr_full_all(chan_p, bundle_p, cfg)
        np.testing.assert_allclose(permuted, base[perm], rtol=1e-9)

    def test_unequal_powers_flow_through(self):
        # Per-user power vectors reach every term: scaling one user's power
        # up leaves the others' detected SINR lower (more interference).
        base_powers = (10**2.3,) * 12
        boosted = (10**2.3,) * 11 + (10**3.3,)
        results = []
        for powers in (base_powers, boosted):
            cfg = make_cfg(num_rrh=16, num_ue=12, training_len=12, data_power=powers)
            chan, est = zero_error_setup(cfg, seed=33)
            bundle = build_detectors(chan, est, cfg, 0.0, 0.0)
            results.append(_sinr_full_all(chan, bundle, cfg))
        assert np.all(results[1][:-1] < results[0][:-1])
        assert results[1][-1] > results[0][-1]

    def test_mmse_beats_random_receivers(self):
        # On small instances the built receiver must dominate random
        # unit-norm receive vectors for every user.
        rng = np.random.default_rng(99)
        for trial in range(8):
            n = int(rng.integers(2, 7))
            k = int(rng.integers(1, 7))
            cfg = make_cfg(num_rrh=n, num_ue=k, training_len=k, radius_m=200.0)
            layout = sample_layout(cfg, 100 + trial)
            chan = build_channel(layout, cfg.alpha, 100 + trial)
            est = sparsify(chan, np.zeros_like(chan.channel), cfg.radius_m)
            bundle = build_detectors(chan, est, cfg, 0.0, 0.0)
            powers = np.asarray(cfg.data_power)
            best = _sinr_full_all(chan, bundle, cfg)
            for _ in range(100):
                v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                v /= np.linalg.norm(v)
                cross = np.abs(v.conj() @ chan.channel) ** 2 * powers
                for user in range(k):
                    interf = cross.sum() - cross[user] + cfg.noise_power
                    assert cross[user] / interf <= best[user] * (1 + 1e-9)


class TestFidelityEmpirical:
    def pilots(self, cfg):
        return PilotScheme(PilotKind.ORTHOGONAL, cfg.training_len, cfg.pilot_power_total)

    def test_zero_error_full_threshold_gives_unit_fidelity(self):
        cfg = make_cfg(est_error_variance=0.0)
        out = fidelity_empirical(
            cfg, DISC, cfg.radius_m, Estimator.LS, self.pilots(cfg), trials=5, seed=3
        )
        assert out.fidelity == pytest.approx(1.0, abs=1e-9)

    def test_ratio_of_means_not_mean_of_ratios(self):
        cfg = make_cfg()
        out = fidelity_empirical(
            cfg, DISC, 2000.0, Estimator.LS, self.pilots(cfg), trials=6, seed=11
        )
        assert out.fidelity == out.mean_sparse_sinr / out.mean_full_sinr
        assert out.trials == 6
        assert out.stderr > 0.0

    def test_bounded_range(self):
        cfg = make_cfg()
        for d0 in (500.0, 2000.0, 5000.0):
            out = fidelity_empirical(
                cfg, DISC, d0, Estimator.LS, self.pilots(cfg), trials=8, seed=2
            )
            assert 0.0 < out.fidelity <= 1.0 + 3.0 * out.stderr

    def test_deterministic(self):
        cfg = make_cfg()
        a = fidelity_empirical(cfg, DISC, 1500.0, Estimator.LS, self.pilots(cfg), 5, 42)
        b = fidelity_empirical(cfg, DISC, 1500.0, Estimator.LS, self.pilots(cfg), 5, 42)
        assert a == b

    def test_requires_two_trials(self):
        cfg = make_cfg()
        with pytest.raises(ValueError):
            fidelity_empirical(cfg, DISC, 1500.0, Estimator.LS, self.pilots(cfg), 1, 0)
