"""Rayleigh-faded SINR channel: per-slot success events and the conditional
success probabilities of one transmission given the network geometry.

Powers are stored in linear watts; helpers convert from dBm / carrier
frequency, matching the configuration surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import NetworkRealization

__all__ = [
    "ChannelParams",
    "SlotOutcome",
    "DegenerateInputError",
    "dbm_to_watts",
    "watts_to_dbm",
    "db_to_linear",
    "thermal_noise_watts",
    "freespace_pathloss_const",
    "default_channel",
    "sample_fading_power",
    "compute_sinr",
    "success_event",
    "run_slot",
    "cond_success_prob_block",
    "cond_success_prob_classical",
]

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_PER_HZ = -174.0

DEFAULT_TX_POWER_DBM = 24.0
DEFAULT_BANDWIDTH_HZ = 200e6
DEFAULT_CARRIER_HZ = 3.2e9


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def thermal_noise_watts(bandwidth_hz: float, noise_figure_db: float = 0.0) -> float:
    """kTB noise floor over the band, optionally raised by a receiver noise figure."""
    dbm = THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return dbm_to_watts(dbm)


def freespace_pathloss_const(carrier_hz: float) -> float:
    """Free-space reference gain (c / 4 pi f)^2 at 1 m."""
    return (SPEED_OF_LIGHT / (4.0 * math.pi * carrier_hz)) ** 2


class DegenerateInputError(ValueError):
    """0/0 SINR: zero noise, empty interference and zero signal fading."""


@dataclass(frozen=True)
class ChannelParams:
    """Transmit power (W), path-loss constant/exponent, noise power (W),
    SINR threshold (linear)."""

    tx_power_eta: float
    pathloss_const_rho: float
    pathloss_exp_alpha: float
    noise_power_N0: float
    sinr_threshold_gamma: float

    def __post_init__(self):
        if self.tx_power_eta <= 0.0:
            raise ValueError("tx_power_eta must be > 0")
        if self.pathloss_const_rho <= 0.0:
            raise ValueError("pathloss_const_rho must be > 0")
        if self.pathloss_exp_alpha < 2.0:
            raise ValueError("pathloss_exp_alpha must be >= 2")
        if self.noise_power_N0 < 0.0:
            raise ValueError("noise_power_N0 must be >= 0")
        if self.sinr_threshold_gamma <= 0.0:
            raise ValueError("sinr_threshold_gamma must be > 0")

    def rx_power_coeff(self, distance) -> np.ndarray | float:
        """Mean received power eta * rho * d^(-alpha) at distance d."""
        return self.tx_power_eta * self.pathloss_const_rho * np.asarray(distance, float) ** (
            -self.pathloss_exp_alpha
        )

    def noise_exponent(self, r0: float) -> float:
        """gamma * N0 / (eta rho r0^(-alpha)); 0 in the noiseless case."""
        if self.noise_power_N0 == 0.0:
            return 0.0
        return self.sinr_threshold_gamma * self.noise_power_N0 / float(self.rx_power_coeff(r0))

    def noise_success_factor(self, r0: float, power: float = 1.0) -> float:
        """exp(-power * gamma * N0 / (eta rho r0^(-alpha)))."""
        return math.exp(-power * self.noise_exponent(r0))

    def with_gamma(self, gamma: float) -> "ChannelParams":
        return replace(self, sinr_threshold_gamma=gamma)


def default_channel(gamma: float = 1.0) -> ChannelParams:
    """Defaults: 24 dBm transmit power, free-space rho at 3.2 GHz, thermal
    noise over 200 MHz, alpha = 2. gamma is receiver/application dependent."""
    return ChannelParams(
        tx_power_eta=dbm_to_watts(DEFAULT_TX_POWER_DBM),
        pathloss_const_rho=freespace_pathloss_const(DEFAULT_CARRIER_HZ),
        pathloss_exp_alpha=2.0,
        noise_power_N0=thermal_noise_watts(DEFAULT_BANDWIDTH_HZ),
        sinr_threshold_gamma=gamma,
    )


@dataclass(frozen=True)
class SlotOutcome:
    """One slot seen by the typical pair; sinr is NaN when the pair is idle."""

    typical_active: bool
    sinr: float
    success_S: int

    def __post_init__(self):
        if self.success_S and not self.typical_active:
            raise ValueError("success requires the typical controller to transmit")


def sample_fading_power(rng: np.random.Generator, size=None):
    """Squared Rayleigh(1) channel gain: unit-mean exponential."""
    return rng.exponential(1.0, size)


def compute_sinr(
    realization: NetworkRealization,
    active_interferers,
    fading_typical: float,
    fading_interferers,
    params: ChannelParams,
) -> float:
    """SINR of the typical link for given fading powers and an active subset.

    `fading_interferers` aligns with `active_interferers` (indices into the
    realization's distance list).
    """
    active = np.asarray(active_interferers, dtype=int)
    h_act = np.asarray(fading_interferers, dtype=float)
    if active.size != h_act.size:
        raise ValueError("one fading draw per active interferer is required")
    signal = float(params.rx_power_coeff(realization.typical_distance_r0)) * fading_typical
    if active.size:
        coeffs = params.rx_power_coeff(realization.interferer_distances[active])
        interference = float(np.dot(coeffs, h_act))
    else:
        interference = 0.0
    denom = params.noise_power_N0 + interference
    if denom == 0.0:
        if signal == 0.0:
            raise DegenerateInputError("0/0 SINR: no noise, no interference, zero fading")
        return math.inf
    return signal / denom


def success_event(sinr: float, typical_active: bool, gamma: float) -> int:
    """1 iff the pair transmits and the SINR strictly exceeds the threshold."""
    return int(bool(typical_active) and sinr > gamma)


def run_slot(
    realization: NetworkRealization,
    active_interferers,
    typical_active: bool,
    params: ChannelParams,
    rng: np.random.Generator,
) -> SlotOutcome:
    """Draw fresh fading and evaluate one slot for the typical pair."""
    if not typical_active:
        return SlotOutcome(False, math.nan, 0)
    active = np.asarray(active_interferers, dtype=int)
    h0 = float(sample_fading_power(rng))
    h = sample_fading_power(rng, active.size)
    sinr = compute_sinr(realization, active, h0, h, params)
    return SlotOutcome(True, sinr, success_event(sinr, True, params.sinr_threshold_gamma))


def _suppression_factors(realization: NetworkRealization, distances, params: ChannelParams):
    """Per-interferer factor r0^(-a) / (r0^(-a) + gamma r^(-a)) in a stable form."""
    a = params.pathloss_exp_alpha
    g = params.sinr_threshold_gamma
    ratio = np.asarray(distances, float) / realization.typical_distance_r0
    return 1.0 / (1.0 + g * ratio ** (-a))


def cond_success_prob_block(
    realization: NetworkRealization, active_interferers, params: ChannelParams
) -> float:
    """Success probability over fading, given the geometry and a fixed active set."""
    active = np.asarray(active_interferers, dtype=int)
    noise = params.noise_success_factor(realization.typical_distance_r0)
    if not active.size:
        return noise
    factors = _suppression_factors(
        realization, realization.interferer_distances[active], params
    )
    return noise * float(np.prod(factors))


def cond_success_prob_classical(
    realization: NetworkRealization, q: float, params: ChannelParams
) -> float:
    """Success probability over fading and per-slot Bernoulli(q) interferer activity."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    noise = params.noise_success_factor(realization.typical_distance_r0)
    if not realization.num_interferers:
        return noise
    factors = _suppression_factors(realization, realization.interferer_distances, params)
    return noise * float(np.prod(q * factors + 1.0 - q))
