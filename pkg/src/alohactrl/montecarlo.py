"""Experiment orchestration: controllability sweeps, analytic-vs-empirical
comparison and regret studies.

Simulation is acknowledgment-level by default: per block the geometry, ALOHA
activity and per-slot Rayleigh fading are drawn and the SINR threshold test
produces the success sequence; the plant state recursion cannot influence the
successes, so restless (consecutive) and rested (total) controllability flags
are computed directly from the sequences. A state-level mode drives the full
controller/actuator loops for validation.

Determinism: work is split into fixed-size chunks, each with its own child
seed sequence; results reduce in chunk order, so outputs are byte-identical
for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import analytics
from .aloha import Protocol
from .bandit import regret_envelope_explicit, run_ts
from .channel import (
    ChannelParams,
    cond_success_prob_block,
    cond_success_prob_classical,
)
from .control import LtiSystem, run_block_rested, run_block_restless
from .geometry import NetworkRealization, PppConfig, sample_ppp

__all__ = [
    "Mode",
    "ExperimentConfig",
    "SweepResult",
    "CompareRow",
    "RegretStudyResult",
    "simulate_ack_blocks",
    "estimate_block_controllability",
    "analytic_controllability",
    "compare_analytic_empirical",
    "estimate_meta_empirical",
    "run_regret_study",
    "default_system_for",
    "window_quadrature",
]

CHUNK_BLOCKS = 4096


class Mode(str, Enum):
    CONTROLLABILITY_SWEEP = "simulate"
    TS_RUN = "ts"
    ANALYTIC_COMPARE = "compare"
    REGRET_STUDY = "regret"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    ppp: PppConfig
    channel: ChannelParams
    protocols: tuple[Protocol, ...] = (Protocol.BLOCK, Protocol.CLASSICAL)
    systems: tuple[str, ...] = ("restless", "rested")
    q_values: tuple[float, ...] = tuple(round(0.1 * i, 10) for i in range(1, 11))
    arms: tuple[float, ...] = tuple(round(0.1 * i, 10) for i in range(1, 11))
    T: int = 20
    v: int = 4
    K: int = 1
    num_realizations: int = 10000
    seed: int = 0
    mode: Mode = Mode.CONTROLLABILITY_SWEEP
    process_noise_std: float = 0.0
    state_level: bool = False
    fixed_geometry: bool = False
    beta_values: tuple[float, ...] = ()
    threads: int = 1
    plant: Optional[LtiSystem] = None

    def __post_init__(self):
        object.__setattr__(self, "protocols", tuple(Protocol(p) for p in self.protocols))
        object.__setattr__(self, "systems", tuple(self.systems))
        object.__setattr__(self, "q_values", tuple(float(q) for q in self.q_values))
        object.__setattr__(self, "arms", tuple(float(a) for a in self.arms))
        object.__setattr__(self, "beta_values", tuple(float(b) for b in self.beta_values))
        object.__setattr__(self, "mode", Mode(self.mode))
        for name in ("T", "v", "K", "num_realizations", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.v > self.T:
            raise ValueError("v must not exceed T")
        for q in self.q_values + self.arms:
            if not 0.0 < q <= 1.0:
                raise ValueError(f"q value {q} outside (0, 1]")
        for s in self.systems:
            if s not in ("restless", "rested"):
                raise ValueError(f"unknown system type {s!r}")
        for b in self.beta_values:
            if not 0.0 < b < 1.0:
                raise ValueError(f"beta value {b} outside (0, 1)")


@dataclass
class SweepResult:
    protocol: Protocol
    system: str
    q: float
    estimate: float
    half_width_95: float
    n_samples: int
    analytic: Optional[float] = None


@dataclass
class CompareRow:
    protocol: Protocol
    system: str
    q: float
    empirical: float
    analytic: float
    abs_diff: float
    passes: bool
    beta: Optional[float] = None


@dataclass
class RegretStudyResult:
    mean_cumulative: np.ndarray
    envelope: np.ndarray
    sublinearity_ratio: float
    num_runs: int
    oracle_arm_histogram: dict[int, int]


def window_quadrature(ppp: PppConfig, **kwargs) -> analytics.QuadratureSpec:
    """Quadrature windowed at the simulation radius, so analytics and
    simulation describe the same finite system."""
    return analytics.QuadratureSpec(outer_limit=ppp.window_radius_R, **kwargs)


def _longest_runs(acks: np.ndarray) -> np.ndarray:
    runs = np.zeros(acks.shape[0], dtype=np.int64)
    best = np.zeros(acks.shape[0], dtype=np.int64)
    for t in range(acks.shape[1]):
        runs = (runs + 1) * acks[:, t]
        np.maximum(best, runs, out=best)
    return best


def _segment_sums(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    cs = np.concatenate(([0.0], np.cumsum(values)))
    return cs[starts[1:]] - cs[starts[:-1]]


def _acks_chunk(
    ppp: PppConfig,
    channel: ChannelParams,
    protocol: Protocol,
    q: float,
    T: int,
    n_blocks: int,
    rng: np.random.Generator,
    realization: Optional[NetworkRealization] = None,
) -> np.ndarray:
    """Success sequences for a chunk of blocks, shape (n_blocks, T)."""
    gamma = channel.sinr_threshold_gamma
    sig = float(channel.rx_power_coeff(ppp.typical_distance_r0))
    N0 = channel.noise_power_N0

    if realization is not None:
        n = realization.num_interferers
        w = channel.rx_power_coeff(realization.interferer_distances) if n else np.empty(0)
        interference = np.zeros((n_blocks, T))
        if protocol is Protocol.BLOCK:
            typ = rng.random(n_blocks) < q
            if n:
                act = (rng.random((n_blocks, n)) < q) * w
                for t in range(T):
                    interference[:, t] = np.einsum(
                        "bn,bn->b", act, rng.exponential(1.0, (n_blocks, n))
                    )
            typical_tx = np.repeat(typ[:, None], T, axis=1)
        else:
            typical_tx = rng.random((n_blocks, T)) < q
            if n:
                for t in range(T):
                    act = (rng.random((n_blocks, n)) < q) * w
                    interference[:, t] = np.einsum(
                        "bn,bn->b", act, rng.exponential(1.0, (n_blocks, n))
                    )
    else:
        counts = rng.poisson(ppp.mean_count, n_blocks)
        starts = np.concatenate(([0], np.cumsum(counts)))
        tot = int(starts[-1])
        radii = ppp.window_radius_R * np.sqrt(rng.random(tot))
        w = channel.rx_power_coeff(radii) if tot else np.empty(0)
        interference = np.zeros((n_blocks, T))
        if protocol is Protocol.BLOCK:
            typ = rng.random(n_blocks) < q
            wa = w * (rng.random(tot) < q)
            for t in range(T):
                interference[:, t] = _segment_sums(
                    wa * rng.exponential(1.0, tot), starts
                )
            typical_tx = np.repeat(typ[:, None], T, axis=1)
        else:
            typical_tx = rng.random((n_blocks, T)) < q
            for t in range(T):
                wa = w * (rng.random(tot) < q)
                interference[:, t] = _segment_sums(
                    wa * rng.exponential(1.0, tot), starts
                )

    h0 = rng.exponential(1.0, (n_blocks, T))
    with np.errstate(divide="ignore"):  # noiseless empty-interference slots: inf SINR
        sinr = sig * h0 / (N0 + interference)
    return (typical_tx & (sinr > gamma)).astype(np.uint8)


def _chunk_seeds(root: np.random.SeedSequence, n_chunks: int):
    return root.spawn(n_chunks)


def simulate_ack_blocks(
    ppp: PppConfig,
    channel: ChannelParams,
    protocol: Protocol,
    q: float,
    T: int,
    n_blocks: int,
    seed_seq: np.random.SeedSequence,
    realization: Optional[NetworkRealization] = None,
    threads: int = 1,
) -> np.ndarray:
    """Deterministic chunked simulation of n_blocks success sequences."""
    protocol = Protocol(protocol)
    n_chunks = (n_blocks + CHUNK_BLOCKS - 1) // CHUNK_BLOCKS
    seeds = _chunk_seeds(seed_seq, n_chunks)
    sizes = [min(CHUNK_BLOCKS, n_blocks - i * CHUNK_BLOCKS) for i in range(n_chunks)]

    def work(i):
        rng = np.random.Generator(np.random.PCG64(seeds[i]))
        return _acks_chunk(ppp, channel, protocol, q, T, sizes[i], rng, realization)

    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    else:
        parts = [work(i) for i in range(n_chunks)]
    return np.concatenate(parts, axis=0)


def estimate_block_controllability(config: ExperimentConfig) -> list[SweepResult]:
    """Empirical block-controllability probability per (protocol, system, q).

    Simulates num_realizations single blocks per point, redrawing the
    geometry each block (set fixed_geometry for a conditional study on one
    realization). Idle typical blocks count in the denominator. Restless
    (run-based) and rested (total-based) flags are evaluated on the same
    simulated sequences.
    """
    root = np.random.SeedSequence(config.seed)
    combo_seeds = root.spawn(len(config.protocols) * len(config.q_values) + 1)
    fixed = None
    if config.fixed_geometry:
        rng = np.random.Generator(np.random.PCG64(combo_seeds[-1]))
        fixed = sample_ppp(config.ppp, rng)

    results: list[SweepResult] = []
    idx = 0
    for protocol in config.protocols:
        for q in config.q_values:
            if config.state_level:
                flags = _state_level_flags(config, protocol, q, combo_seeds[idx])
                n = config.num_realizations
                for system in config.systems:
                    p_hat = float(np.mean(flags[system]))
                    results.append(SweepResult(
                        protocol, system, q, p_hat,
                        1.96 * math.sqrt(max(p_hat * (1 - p_hat), 0.0) / n), n,
                    ))
            else:
                acks = simulate_ack_blocks(
                    config.ppp, config.channel, protocol, q, config.T,
                    config.num_realizations, combo_seeds[idx],
                    realization=fixed, threads=config.threads,
                )
                n = acks.shape[0]
                restless = _longest_runs(acks) >= config.v
                rested = acks.sum(axis=1) >= config.v
                flags = {"restless": restless, "rested": rested}
                for system in config.systems:
                    p_hat = float(np.mean(flags[system]))
                    results.append(SweepResult(
                        protocol, system, q, p_hat,
                        1.96 * math.sqrt(max(p_hat * (1 - p_hat), 0.0) / n), n,
                    ))
            idx += 1
    return results


def default_system_for(v: int) -> LtiSystem:
    """A v-dimensional plant whose minimal polynomial has degree exactly v:
    a single Jordan block at 0.9 with full-rank actuation."""
    A = 0.9 * np.eye(v) + np.diag(np.ones(v - 1), 1) if v > 1 else np.array([[0.9]])
    B = np.eye(v)
    x_des = np.ones(v)
    return LtiSystem(A, B, x_des, v=v)


def _state_level_flags(config, protocol, q, seed_seq):
    """Slow path: run the full controller/actuator loops per block."""
    sys = config.plant if config.plant is not None else default_system_for(config.v)
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    out = {"restless": np.zeros(config.num_realizations, bool),
           "rested": np.zeros(config.num_realizations, bool)}
    for b in range(config.num_realizations):
        realization = sample_ppp(config.ppp, rng)
        n = realization.num_interferers
        if protocol is Protocol.BLOCK:
            typical = int(rng.random() < q)
            access = np.full(config.T, typical, dtype=np.uint8)
            active = rng.random(n) < q
            active_slots = [np.flatnonzero(active)] * config.T
        else:
            access = (rng.random(config.T) < q).astype(np.uint8)
            active_slots = [np.flatnonzero(rng.random(n) < q) for _ in range(config.T)]

        w = config.channel.rx_power_coeff(realization.interferer_distances) if n else np.empty(0)
        sig = float(config.channel.rx_power_coeff(config.ppp.typical_distance_r0))

        def oracle(t):
            idx = active_slots[t]
            interference = float(
                np.dot(w[idx], rng.exponential(1.0, idx.size))
            ) if idx.size else 0.0
            sinr = sig * rng.exponential(1.0) / (config.channel.noise_power_N0 + interference)
            return int(sinr > config.channel.sinr_threshold_gamma)

        x0 = sys.x_des + rng.normal(0.0, 1.0, sys.n)
        if "restless" in config.systems:
            tr = run_block_restless(sys, config.T, access, oracle, x0, x0, rng)
            out["restless"][b] = tr.block_controllable
        if "rested" in config.systems:
            tr = run_block_rested(sys, config.T, access, oracle, x0, x0, rng)
            out["rested"][b] = tr.block_controllable
    return out


def analytic_controllability(
    config: ExperimentConfig, protocol: Protocol, q: float,
    quad: Optional[analytics.QuadratureSpec] = None,
) -> float:
    """Averaged restless block-controllability from the moment expansion,
    windowed at the simulation radius."""
    quad = quad or window_quadrature(config.ppp)
    return analytics.prob_block_controllable_restless(
        config.T, config.v, q, config.ppp.intensity_lambda, config.channel,
        quad, protocol, r0=config.ppp.typical_distance_r0,
    )


def compare_analytic_empirical(config: ExperimentConfig) -> list[CompareRow]:
    """Empirical restless controllability vs the analytic value per (protocol, q);
    passes iff |diff| <= max(0.02, 3 * half-width)."""
    sweep = estimate_block_controllability(
        replace(config, systems=("restless",))
    )
    rows = []
    for res in sweep:
        analytic = analytic_controllability(config, res.protocol, res.q)
        diff = abs(res.estimate - analytic)
        rows.append(CompareRow(
            res.protocol, res.system, res.q, res.estimate, analytic, diff,
            diff <= max(0.02, 3.0 * res.half_width_95),
        ))
    return rows


def estimate_meta_empirical(
    config: ExperimentConfig, protocol: Protocol, q: float, beta: float,
    seed_seq: Optional[np.random.SeedSequence] = None,
) -> float:
    """Fraction of realizations whose per-realization success tail reaches beta.

    Block ALOHA draws the per-block active subset along with the geometry;
    classical needs the geometry only.
    """
    protocol = Protocol(protocol)
    pstar = analytics.inverse_tail_threshold(config.T, config.v, q, beta, protocol)
    if pstar is None:
        return 0.0
    seed_seq = seed_seq or np.random.SeedSequence(config.seed)
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    hits = 0
    n = config.num_realizations
    for _ in range(n):
        realization = sample_ppp(config.ppp, rng)
        if protocol is Protocol.BLOCK:
            active = np.flatnonzero(
                rng.random(realization.num_interferers) < q
            )
            p = cond_success_prob_block(realization, active, config.channel)
        else:
            p = cond_success_prob_classical(realization, q, config.channel)
        hits += p >= pstar
    return hits / n


def run_regret_study(config: ExperimentConfig) -> RegretStudyResult:
    """Mean cumulative TS regret over independent realizations, with the
    explicit envelope and the R(2K)/R(K) sub-linearity ratio."""
    if config.mode is not Mode.REGRET_STUDY and config.mode is not Mode.TS_RUN:
        raise ValueError("run_regret_study expects a regret/ts mode config")
    protocol = config.protocols[0]
    D = len(config.arms)
    K = config.K
    root = np.random.SeedSequence(config.seed)
    seeds = root.spawn(config.num_realizations)

    def one_run(i):
        rng = np.random.Generator(np.random.PCG64(seeds[i]))
        realization = sample_ppp(config.ppp, rng)
        trace, _ = run_ts(
            realization, config.arms, protocol, config.channel, config.T, K, rng,
            snapshot_every=0,
        )
        return trace.cumulative, trace.oracle_arm_index

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outputs = list(pool.map(one_run, range(config.num_realizations)))
    else:
        outputs = [one_run(i) for i in range(config.num_realizations)]

    curves = np.stack([c for c, _ in outputs])
    mean_curve = curves.mean(axis=0)
    envelope = np.array([regret_envelope_explicit(k, config.T, D) for k in range(1, K + 1)])
    ratio = float(mean_curve[-1] / mean_curve[K // 2 - 1]) if K >= 2 and mean_curve[K // 2 - 1] > 0 else 0.0
    histogram: dict[int, int] = {}
    for _, idx in outputs:
        histogram[idx] = histogram.get(idx, 0) + 1
    return RegretStudyResult(mean_curve, envelope, ratio, config.num_realizations, histogram)
