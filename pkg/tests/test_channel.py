import math

import numpy as np
import pytest

from alohactrl.channel import (
    ChannelParams,
    DegenerateInputError,
    compute_sinr,
    cond_success_prob_block,
    cond_success_prob_classical,
    dbm_to_watts,
    default_channel,
    freespace_pathloss_const,
    run_slot,
    sample_fading_power,
    success_event,
    thermal_noise_watts,
)
from alohactrl.geometry import NetworkRealization


def rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


def unit_params(alpha=2.0, gamma=1.0, N0=0.0):
    return ChannelParams(1.0, 1.0, alpha, N0, gamma)


class TestUnits:
    def test_dbm_conversion(self):
        assert dbm_to_watts(30.0) == pytest.approx(1.0)
        assert dbm_to_watts(24.0) == pytest.approx(10 ** (-0.6))

    def test_thermal_noise(self):
        # -174 dBm/Hz over 200 MHz ~ -90.99 dBm
        n0 = thermal_noise_watts(200e6)
        assert 10 * math.log10(n0) + 30 == pytest.approx(-90.9897, abs=1e-3)

    def test_freespace_rho(self):
        rho = freespace_pathloss_const(3.2e9)
        assert rho == pytest.approx((299792458.0 / (4 * math.pi * 3.2e9)) ** 2)

    def test_defaults_compose(self):
        ch = default_channel()
        assert ch.pathloss_exp_alpha == 2.0
        assert ch.sinr_threshold_gamma == 1.0

    def test_param_validation(self):
        with pytest.raises(ValueError):
            ChannelParams(1.0, 1.0, 1.5, 0.0, 1.0)
        with pytest.raises(ValueError):
            ChannelParams(0.0, 1.0, 2.0, 0.0, 1.0)


class TestFading:
    def test_mean_one(self):
        draws = sample_fading_power(rng(1), 1_000_000)
        assert 0.997 < draws.mean() < 1.003

    def test_median_ln2(self):
        draws = sample_fading_power(rng(2), 1_000_000)
        assert abs(np.median(draws) - math.log(2.0)) < 0.005

    def test_support(self):
        draws = sample_fading_power(rng(3), 100_000)
        assert (draws >= 0).all()


class TestSinr:
    def test_no_interference_definition(self):
        params = ChannelParams(1.0, 1.0, 2.0, 1.0 * 1.0 * 10.0 ** -2.0, 1.0)
        real = NetworkRealization(np.empty(0), 10.0)
        assert compute_sinr(real, [], 1.0, [], params) == pytest.approx(1.0)

    def test_symmetry(self):
        params = unit_params()
        real = NetworkRealization(np.array([10.0]), 10.0)
        assert compute_sinr(real, [0], 0.7, [0.7], params) == pytest.approx(1.0)

    def test_hand_arithmetic(self):
        # r0=10, r1=20, alpha=2, unit fading, no noise -> 10^-2 / 20^-2 = 4
        params = unit_params()
        real = NetworkRealization(np.array([20.0]), 10.0)
        assert compute_sinr(real, [0], 1.0, [1.0], params) == pytest.approx(4.0)

    def test_degenerate_rejected(self):
        params = unit_params(N0=0.0)
        real = NetworkRealization(np.empty(0), 10.0)
        with pytest.raises(DegenerateInputError):
            compute_sinr(real, [], 0.0, [], params)

    def test_fading_count_mismatch(self):
        params = unit_params()
        real = NetworkRealization(np.array([20.0, 30.0]), 10.0)
        with pytest.raises(ValueError):
            compute_sinr(real, [0, 1], 1.0, [1.0], params)


class TestSuccessEvent:
    def test_active_above(self):
        assert success_event(2.0, True, 1.0) == 1

    def test_inactive(self):
        assert success_event(100.0, False, 1.0) == 0

    def test_tie_is_failure(self):
        assert success_event(1.0, True, 1.0) == 0


class TestConditionalSuccessBlock:
    def test_empty_product(self):
        real = NetworkRealization(np.empty(0), 10.0)
        assert cond_success_prob_block(real, [], unit_params()) == 1.0

    def test_equal_pathloss_halves(self):
        real = NetworkRealization(np.array([10.0]), 10.0)
        assert cond_success_prob_block(real, [0], unit_params()) == pytest.approx(0.5)

    def test_matches_fading_monte_carlo(self):
        # fixed realization {r0=10, r1=15, r2=40}, alpha=2, gamma=1, N0=0
        params = unit_params()
        real = NetworkRealization(np.array([15.0, 40.0]), 10.0)
        active = [0, 1]
        want = cond_success_prob_block(real, active, params)
        g = rng(5)
        n = 1_000_000
        h0 = g.exponential(1.0, n)
        h = g.exponential(1.0, (n, 2))
        coeffs = params.rx_power_coeff(real.interferer_distances[active])
        sig = params.rx_power_coeff(10.0) * h0
        interference = h @ coeffs
        emp = float(np.mean(sig / interference > 1.0))
        se = math.sqrt(want * (1 - want) / n)
        assert abs(emp - want) < 3 * se

    def test_monotone_in_interferers_and_gamma(self):
        real = NetworkRealization(np.array([12.0, 25.0, 60.0]), 10.0)
        p0 = cond_success_prob_block(real, [0], unit_params())
        p01 = cond_success_prob_block(real, [0, 1], unit_params())
        p012 = cond_success_prob_block(real, [0, 1, 2], unit_params())
        assert 1.0 >= p0 >= p01 >= p012 >= 0.0
        harder = cond_success_prob_block(real, [0, 1, 2], unit_params(gamma=2.0))
        assert harder <= p012


class TestConditionalSuccessClassical:
    def test_q_zero_noise_only(self):
        params = ChannelParams(1.0, 1.0, 2.0, 1e-3, 1.0)
        real = NetworkRealization(np.array([15.0]), 10.0)
        want = params.noise_success_factor(10.0)
        assert cond_success_prob_classical(real, 0.0, params) == pytest.approx(want)

    def test_q_one_is_block_all_active(self):
        params = unit_params()
        real = NetworkRealization(np.array([15.0, 40.0]), 10.0)
        assert cond_success_prob_classical(real, 1.0, params) == pytest.approx(
            cond_success_prob_block(real, [0, 1], params)
        )

    def test_matches_thinning_monte_carlo(self):
        params = unit_params()
        real = NetworkRealization(np.array([13.0, 22.0, 45.0, 80.0]), 10.0)
        q = 0.6
        want = cond_success_prob_classical(real, q, params)
        g = rng(9)
        n = 100_000
        vals = np.empty(n)
        for i in range(n):
            active = np.flatnonzero(g.random(4) < q)
            vals[i] = cond_success_prob_block(real, active, params)
        se = vals.std(ddof=1) / math.sqrt(n)
        assert abs(vals.mean() - want) < 3 * se

    def test_monotone_in_q(self):
        params = unit_params()
        real = NetworkRealization(np.array([15.0, 30.0]), 10.0)
        values = [cond_success_prob_classical(real, q, params) for q in np.linspace(0, 1, 11)]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))


class TestRunSlot:
    def test_idle_slot(self):
        out = run_slot(NetworkRealization(np.empty(0), 10.0), [], False, unit_params(), rng(1))
        assert out.success_S == 0 and not out.typical_active and math.isnan(out.sinr)

    def test_success_rate_matches_conditional(self):
        params = unit_params()
        real = NetworkRealization(np.array([14.0, 35.0]), 10.0)
        want = cond_success_prob_block(real, [0, 1], params)
        g = rng(21)
        n = 200_000
        wins = sum(run_slot(real, [0, 1], True, params, g).success_S for _ in range(n))
        emp = wins / n
        se = math.sqrt(want * (1 - want) / n)
        assert abs(emp - want) < 3.5 * se
