import math

import numpy as np
import pytest

from alohactrl.aloha import Protocol
from alohactrl.channel import ChannelParams, default_channel
from alohactrl.geometry import PppConfig
from alohactrl.montecarlo import (
    ExperimentConfig,
    Mode,
    compare_analytic_empirical,
    default_system_for,
    estimate_block_controllability,
    estimate_meta_empirical,
    run_regret_study,
    simulate_ack_blocks,
    _longest_runs,
)


def unit_params(alpha=4.0, gamma=1.0, N0=0.0):
    return ChannelParams(1.0, 1.0, alpha, N0, gamma)


def small_config(**kw):
    base = dict(
        ppp=PppConfig(5e-4, 150.0, 10.0),
        channel=unit_params(alpha=2.0),
        T=10,
        v=2,
        num_realizations=4000,
        seed=3,
    )
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_rejects_bad_q(self):
        with pytest.raises(ValueError):
            small_config(q_values=(0.5, 1.2))

    def test_rejects_v_above_T(self):
        with pytest.raises(ValueError):
            small_config(v=11)

    def test_rejects_unknown_system(self):
        with pytest.raises(ValueError):
            small_config(systems=("restless", "sleepy"))


class TestSimulateAckBlocks:
    def test_q_zero_all_idle(self):
        acks = simulate_ack_blocks(
            PppConfig(5e-4, 150.0, 10.0), unit_params(), Protocol.BLOCK,
            0.0, 10, 2000, np.random.SeedSequence(1),
        )
        assert not acks.any()

    def test_reproducible_across_threads(self):
        args = (PppConfig(5e-3, 100.0, 10.0), default_channel(), Protocol.CLASSICAL,
                0.6, 12, 9000)
        a = simulate_ack_blocks(*args, np.random.SeedSequence(5), threads=1)
        b = simulate_ack_blocks(*args, np.random.SeedSequence(5), threads=4)
        assert np.array_equal(a, b)

    def test_longest_run_helper(self):
        acks = np.array([[1, 1, 0, 1], [0, 0, 0, 0], [1, 1, 1, 1]], dtype=np.uint8)
        assert list(_longest_runs(acks)) == [2, 0, 4]

    def test_success_rate_matches_conditional_marginal(self):
        # per-slot marginal success probability is q * E[P_cls]
        from alohactrl.analytics import QuadratureSpec, moment_zeta

        ppp = PppConfig(5e-4, 150.0, 10.0)
        params = unit_params(alpha=2.0)
        q = 0.5
        acks = simulate_ack_blocks(
            ppp, params, Protocol.CLASSICAL, q, 10, 40_000, np.random.SeedSequence(9)
        )
        emp = float(acks.mean())
        quad = QuadratureSpec(outer_limit=ppp.window_radius_R)
        want = moment_zeta(1, q, ppp.intensity_lambda, params, quad,
                           Protocol.CLASSICAL, r0=ppp.typical_distance_r0)
        n = acks.size
        assert abs(emp - want) < 3 * math.sqrt(want * (1 - want) / n)


class TestEstimateBlockControllability:
    def test_rested_dominates_restless(self):
        results = estimate_block_controllability(small_config())
        by_key = {(r.protocol, r.system, r.q): r.estimate for r in results}
        for protocol in (Protocol.BLOCK, Protocol.CLASSICAL):
            for q in small_config().q_values:
                assert by_key[(protocol, "rested", q)] >= by_key[(protocol, "restless", q)]

    def test_ci_shrinks_with_n(self):
        r1 = estimate_block_controllability(
            small_config(num_realizations=2000, q_values=(0.5,))
        )[0]
        r2 = estimate_block_controllability(
            small_config(num_realizations=8000, q_values=(0.5,))
        )[0]
        # quadrupling n halves the CI width (within estimate noise)
        assert r2.half_width_95 < 0.65 * r1.half_width_95

    def test_fixed_geometry_mode(self):
        results = estimate_block_controllability(
            small_config(fixed_geometry=True, q_values=(0.4,), num_realizations=2000)
        )
        assert all(0.0 <= r.estimate <= 1.0 for r in results)

    def test_state_level_agrees_with_ack_level(self):
        cfg = small_config(
            q_values=(0.6,), num_realizations=2500,
            protocols=(Protocol.BLOCK,),
        )
        ack = {r.system: r for r in estimate_block_controllability(cfg)}
        state = {
            r.system: r
            for r in estimate_block_controllability(
                ExperimentConfig(**{**cfg.__dict__, "state_level": True})
            )
        }
        for system in ("restless", "rested"):
            tol = 3.0 * math.hypot(ack[system].half_width_95, state[system].half_width_95)
            assert abs(ack[system].estimate - state[system].estimate) < max(tol, 0.02)


class TestCompare:
    def test_zero_intensity_exact_agreement(self):
        cfg = small_config(
            ppp=PppConfig(0.0, 150.0, 10.0),
            channel=ChannelParams(1.0, 1.0, 2.0, 2e-3, 1.0),
            q_values=(0.3, 0.8),
            num_realizations=30_000,
        )
        rows = compare_analytic_empirical(cfg)
        assert rows and all(r.passes for r in rows)

    def test_moderate_density_passes(self):
        cfg = small_config(q_values=(0.4, 0.9), num_realizations=30_000)
        rows = compare_analytic_empirical(cfg)
        assert rows and all(r.passes for r in rows)


class TestMetaEmpirical:
    def test_block_unreachable_beta_zero(self):
        cfg = small_config(T=20, v=4)
        assert estimate_meta_empirical(cfg, Protocol.BLOCK, 0.5, 0.9) == 0.0

    def test_fraction_in_unit_interval(self):
        cfg = small_config(T=20, v=4, num_realizations=500)
        frac = estimate_meta_empirical(cfg, Protocol.CLASSICAL, 0.7, 0.7)
        assert 0.0 <= frac <= 1.0


class TestRegretStudy:
    def test_single_arm_flat_zero(self):
        cfg = small_config(
            arms=(0.5,), K=50, num_realizations=3, mode=Mode.REGRET_STUDY,
            channel=default_channel(),
        )
        study = run_regret_study(cfg)
        assert np.all(study.mean_cumulative == 0.0)

    def test_curve_below_envelope_and_monotone(self):
        cfg = small_config(
            arms=(0.2, 0.5, 0.9), K=300, num_realizations=6,
            mode=Mode.REGRET_STUDY, channel=default_channel(),
        )
        study = run_regret_study(cfg)
        assert np.all(np.diff(study.mean_cumulative) >= -1e-12)
        assert np.all(study.mean_cumulative <= study.envelope)

    def test_default_system_shape(self):
        sys = default_system_for(4)
        assert sys.v == 4 and sys.n == 4
