"""Built-in oracle checks runnable without the test suite installed.

Each check recomputes its expected value from an independent route
(enumeration, direct summation, hand arithmetic, or a seeded Monte-Carlo law)
and compares the library against it. `alohactrl selftest` runs every check
and exits nonzero if any fails.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from . import analytics, bandit, channel, control, geometry, montecarlo
from .aloha import Protocol, draw_access_block, draw_access_classical

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


def _rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


def _enumerate_run_tail(T, v, p):
    total = 0.0
    for bits in product((0, 1), repeat=T):
        run = best = 0
        for b in bits:
            run = run + 1 if b else 0
            best = max(best, run)
        if best >= v:
            ones = sum(bits)
            total += p**ones * (1 - p) ** (T - ones)
    return total


@check
def demoivre_hand_case():
    assert abs(analytics.run_ccdf_demoivre(3, 2, 0.5) - 0.375) < 1e-15


@check
def demoivre_vs_enumeration():
    for T in (4, 6, 8):
        for v in (1, 2, 3):
            for p in (0.2, 0.5, 0.8):
                got = analytics.run_ccdf_demoivre(T, v, p)
                want = _enumerate_run_tail(T, v, p)
                assert abs(got - want) < 1e-12, (T, v, p, got, want)


@check
def demoivre_single_run():
    for T, p in ((5, 0.3), (9, 0.7)):
        assert abs(analytics.run_ccdf_demoivre(T, 1, p) - (1 - (1 - p) ** T)) < 1e-12


@check
def binomial_tail_direct():
    T, v, p = 20, 4, 0.3
    direct = sum(math.comb(T, l) * p**l * (1 - p) ** (T - l) for l in range(v, T + 1))
    assert abs(analytics.binomial_tail(T, v, p) - direct) < 1e-12
    assert analytics.binomial_tail(T, 0, p) == 1.0
    assert analytics.binomial_tail(T, 3, 0.0) == 0.0


@check
def sinr_hand_case():
    params = channel.ChannelParams(1.0, 1.0, 2.0, 0.0, 1.0)
    real = geometry.NetworkRealization(np.array([20.0]), 10.0)
    sinr = channel.compute_sinr(real, [0], 1.0, [1.0], params)
    assert abs(sinr - 4.0) < 1e-12


@check
def conditional_success_hand_cases():
    params = channel.ChannelParams(1.0, 1.0, 2.0, 0.0, 1.0)
    real = geometry.NetworkRealization(np.array([10.0]), 10.0)
    assert channel.cond_success_prob_block(real, [], params) == 1.0
    assert abs(channel.cond_success_prob_block(real, [0], params) - 0.5) < 1e-12
    assert abs(
        channel.cond_success_prob_classical(real, 1.0, params)
        - channel.cond_success_prob_block(real, [0], params)
    ) < 1e-12


@check
def minimal_poly_cases():
    assert control.minimal_poly_degree(np.eye(3)) == 1
    assert control.minimal_poly_degree(np.diag([1.0, 2.0])) == 2
    J = 0.5 * np.eye(3) + np.diag([1.0, 1.0], 1)
    assert control.minimal_poly_degree(J) == 3


@check
def design_inputs_two_step():
    # double integrator: fine for input design, no holding/feedback input
    sys = control.LtiSystem([[1, 1], [0, 1]], [[0], [1]], [1.0, 0.0], v=2,
                            require_range=False)
    plan = control.design_inputs(sys, np.zeros(2))
    reached = sys.A @ (sys.B @ plan[0]) + sys.B @ plan[1]
    assert np.allclose(reached, [1.0, 0.0], atol=1e-9)


@check
def holding_and_feedback_hand_cases():
    sys = control.LtiSystem(0.5 * np.eye(2), np.eye(2), [2.0, 2.0])
    u_bar = control.holding_input(sys)
    assert np.allclose(u_bar, [1.0, 1.0], atol=1e-12)
    assert np.allclose(sys.A @ sys.x_des + sys.B @ u_bar, sys.x_des, atol=1e-12)
    scalar = control.LtiSystem([[0.9]], [[2.0]], [0.0])
    u = control.feedback_input(scalar, [10.0])
    assert abs(u[0] - 0.5) < 1e-12
    assert abs(0.9 * 10.0 + 2.0 * u[0] - 10.0) < 1e-12


@check
def restless_full_success_reaches_target():
    sys = montecarlo.default_system_for(3)
    trace = control.run_block_restless(
        sys, 8, np.ones(8, dtype=int), lambda t: 1,
        np.zeros(3), np.zeros(3),
    )
    assert trace.block_controllable
    assert np.allclose(trace.states_x[-1], sys.x_des, atol=1e-9)
    assert np.allclose(trace.states_x, trace.estimates_xhat, atol=1e-9)


@check
def rested_scattered_success_reaches_target():
    sys = montecarlo.default_system_for(3)
    pattern = [0, 1, 0, 1, 0, 0, 1, 0]
    trace = control.run_block_rested(
        sys, 8, np.ones(8, dtype=int), lambda t: pattern[t],
        np.zeros(3), np.zeros(3),
    )
    assert trace.block_controllable
    assert np.allclose(trace.states_x[-1], sys.x_des, atol=1e-9)


@check
def run_detectors_vs_scan():
    rng = _rng(7)
    for _ in range(300):
        acks = (rng.random(20) < 0.4).astype(int)
        v = int(rng.integers(1, 6))
        run = best = 0
        for s in acks:
            run = run + 1 if s else 0
            best = max(best, run)
        assert control.is_block_controllable_restless(acks, v) == (best >= v)
        assert control.is_block_controllable_rested(acks, v) == (acks.sum() >= v)
        if control.is_block_controllable_restless(acks, v):
            assert control.is_block_controllable_rested(acks, v)


@check
def ppp_trivial_cases():
    cfg = geometry.PppConfig(0.0, 100.0, 10.0)
    real = geometry.sample_ppp(cfg, _rng(1))
    assert real.num_interferers == 0
    cfg = geometry.PppConfig(5e-3, 100.0, 10.0)
    real = geometry.sample_ppp(cfg, _rng(2))
    assert real.interferer_distances.max() <= 100.0
    assert real.interferer_distances.min() > 0.0


@check
def aloha_trivial_cases():
    assert not draw_access_block(0.0, 50, _rng(3)).any()
    assert draw_access_block(1.0, 50, _rng(3)).all()
    assert not draw_access_classical(0.0, 10, 5, _rng(3)).any()


@check
def posterior_bookkeeping():
    post = bandit.ArmPosterior(1.0, 1.0)
    post = bandit.batch_update(post, 20, 20)
    assert (post.a, post.b) == (21.0, 1.0)
    post = bandit.batch_update(bandit.ArmPosterior(1.0, 1.0), 0, 20)
    assert (post.a, post.b) == (1.0, 21.0)


@check
def arm_selection_dominance():
    rng = _rng(11)
    arms = [bandit.ArmPosterior(1000.0, 1.0), bandit.ArmPosterior(1.0, 1000.0)]
    picks = sum(bandit.select_arm(arms, rng) == 0 for _ in range(1000))
    assert picks >= 999


@check
def oracle_arm_dense_dummy():
    params = channel.ChannelParams(1.0, 1.0, 2.0, 0.0, 1.0)
    real = geometry.NetworkRealization(np.array([10.0]), 10.0)
    arms = [round(0.1 * i, 10) for i in range(1, 11)]
    idx, mu = bandit.oracle_arm(real, arms, params, Protocol.BLOCK, T=20)
    assert arms[idx] == 1.0
    assert abs(mu - 20 * 1.0 * 0.5) < 1e-9


@check
def envelope_arithmetic():
    assert abs(bandit.regret_envelope(2, 1, 1, 1.0) - math.sqrt(2 * math.log(2))) < 1e-12
    want = math.sqrt(64 * 5000 * 10 * math.log(5000)) + 4 * 20 * 10
    assert abs(bandit.regret_envelope_explicit(5000, 20, 10) - want) < 1e-9


@check
def threshold_inversion():
    assert analytics.inverse_tail_threshold(20, 4, 0.5, 0.9, Protocol.BLOCK) is None
    p = analytics.inverse_tail_threshold(20, 4, 1.0, 0.9, Protocol.BLOCK)
    assert analytics.binomial_tail(20, 4, p) >= 0.9
    assert analytics.binomial_tail(20, 4, p - 1e-9) < 0.9


@check
def meta_point_mass():
    params = channel.ChannelParams(1.0, 1.0, 4.0, 0.0, 1.0)
    quad = analytics.QuadratureSpec(outer_limit=500.0)
    query = analytics.MetaQuery(4, 0.9, 20, 1.0, 0.0, params, 10.0)
    # noiseless, no interferers: success probability is exactly 1
    assert analytics.meta_distribution_rested(query, quad, Protocol.BLOCK) == 1.0
    low_q = analytics.MetaQuery(4, 0.9, 20, 0.5, 0.0, params, 10.0)
    assert analytics.meta_distribution_rested(low_q, quad, Protocol.BLOCK) == 0.0


@check
def chunked_simulation_reproducible():
    ppp = geometry.PppConfig(5e-3, 100.0, 10.0)
    params = channel.default_channel()
    a = montecarlo.simulate_ack_blocks(
        ppp, params, Protocol.BLOCK, 0.5, 10, 5000,
        np.random.SeedSequence(42), threads=1,
    )
    b = montecarlo.simulate_ack_blocks(
        ppp, params, Protocol.BLOCK, 0.5, 10, 5000,
        np.random.SeedSequence(42), threads=3,
    )
    assert np.array_equal(a, b)


def run_selftest(verbose: bool = True) -> int:
    failures = 0
    for fn in CHECKS:
        name = fn.__name__
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            if verbose:
                print(f"FAIL {name}: {exc}")
        else:
            if verbose:
                print(f"PASS {name}")
    if verbose:
        print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return 1 if failures else 0
