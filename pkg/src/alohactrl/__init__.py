"""alohactrl: ALOHA channel access for Poisson networks of control loops.

A simulator plus closed-form analytics toolkit: Poisson bipolar geometry,
SINR success events, restless/rested control loops over the lossy link,
block/classical ALOHA access, network-averaged controllability statistics,
meta distributions, and Thompson-sampling selection of the ALOHA parameter.
"""

__version__ = "0.1.0"

from .aloha import AlohaPolicy, Protocol, draw_access_block, draw_access_classical
from .analytics import (
    MetaQuery,
    QuadratureError,
    QuadratureSpec,
    binomial_tail,
    interference_log_integral,
    inverse_tail_threshold,
    meta_distribution_rested,
    moment_zeta,
    prob_block_controllable_restless,
    run_ccdf_demoivre,
)
from .bandit import (
    ArmPosterior,
    RegretTrace,
    batch_update,
    oracle_arm,
    regret_envelope,
    regret_envelope_explicit,
    run_ts,
    sample_beta,
    select_arm,
)
from .channel import (
    ChannelParams,
    SlotOutcome,
    compute_sinr,
    cond_success_prob_block,
    cond_success_prob_classical,
    default_channel,
    run_slot,
    sample_fading_power,
    success_event,
)
from .control import (
    BlockTrace,
    LtiSystem,
    design_inputs,
    feedback_input,
    holding_input,
    is_block_controllable_rested,
    is_block_controllable_restless,
    minimal_poly_degree,
    propagate,
    run_block_rested,
    run_block_restless,
    update_estimate,
)
from .geometry import (
    NetworkRealization,
    PppConfig,
    default_window_radius,
    expected_interference_mean,
    realization_from_json,
    realization_to_json,
    sample_ppp,
)
from .montecarlo import (
    ExperimentConfig,
    Mode,
    SweepResult,
    compare_analytic_empirical,
    estimate_block_controllability,
    estimate_meta_empirical,
    run_regret_study,
    simulate_ack_blocks,
    window_quadrature,
)

__all__ = [name for name in dir() if not name.startswith("_")]
