"""Sample a Poisson network and check the conditional success probabilities.

Walks through the basic objects: a disk-window Poisson realization around the
typical pair, per-slot SINR draws, and the closed-form success probabilities
given the geometry (all interferers active vs per-slot Bernoulli thinning),
each cross-checked against a quick Monte Carlo.
"""

import numpy as np

from alohactrl import (
    ChannelParams,
    PppConfig,
    cond_success_prob_block,
    cond_success_prob_classical,
    run_slot,
    sample_ppp,
)

rng = np.random.default_rng(1)

ppp = PppConfig(intensity_lambda=5e-4, window_radius_R=224.0, typical_distance_r0=10.0)
channel = ChannelParams(
    tx_power_eta=0.25, pathloss_const_rho=5.6e-5, pathloss_exp_alpha=2.0,
    noise_power_N0=8e-13, sinr_threshold_gamma=1.0,
)

real = sample_ppp(ppp, rng)
print(f"sampled {real.num_interferers} interferers in a {ppp.window_radius_R:.0f} m disk "
      f"(expected {ppp.mean_count:.1f})")
print(f"nearest interferer: {real.interferer_distances.min():.1f} m, "
      f"typical link: {real.typical_distance_r0:.0f} m")

# success probability with every interferer transmitting, fading averaged out
all_active = np.arange(real.num_interferers)
p_blk = cond_success_prob_block(real, all_active, channel)
print(f"\nP(success | all active)        = {p_blk:.4f}")

# per-slot simulation agrees
n = 50_000
wins = sum(run_slot(real, all_active, True, channel, rng).success_S for _ in range(n))
print(f"empirical over {n} faded slots  = {wins / n:.4f}")

# thinned activity: each interferer transmits with probability q per slot
for q in (0.2, 0.5, 0.9):
    p_cls = cond_success_prob_classical(real, q, channel)
    print(f"P(success | Bernoulli({q}) interferers) = {p_cls:.4f}")
