"""Poisson bipolar network geometry: disk-window sampling and diagnostics.

Interferer positions follow a homogeneous Poisson point process on a finite
disk window centered at the typical receiver; only point distances are kept,
since every downstream statistic depends on distances alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "PppConfig",
    "NetworkRealization",
    "InterferenceMean",
    "default_window_radius",
    "sample_ppp",
    "expected_interference_mean",
    "realization_to_json",
    "realization_from_json",
]


def default_window_radius(intensity_lambda: float, typical_distance_r0: float) -> float:
    """Truncation radius for the simulation window.

    Wide enough that the typical link sits deep inside the window, and widened
    for sparse networks so the expected interferer count stays O(100).
    """
    if intensity_lambda <= 0.0:
        return 10.0 * typical_distance_r0
    return max(10.0 * typical_distance_r0, 5.0 / math.sqrt(intensity_lambda))


@dataclass(frozen=True)
class PppConfig:
    """Density (per m^2), window radius (m) and typical pair distance (m)."""

    intensity_lambda: float
    window_radius_R: float
    typical_distance_r0: float

    def __post_init__(self):
        if self.intensity_lambda < 0.0:
            raise ValueError(f"intensity_lambda must be >= 0, got {self.intensity_lambda}")
        if self.window_radius_R <= 0.0:
            raise ValueError(f"window_radius_R must be > 0, got {self.window_radius_R}")
        if self.typical_distance_r0 <= 0.0:
            raise ValueError(f"typical_distance_r0 must be > 0, got {self.typical_distance_r0}")
        if self.typical_distance_r0 > self.window_radius_R:
            raise ValueError("typical_distance_r0 must not exceed window_radius_R")

    @property
    def mean_count(self) -> float:
        """Expected number of interferers in the window."""
        return self.intensity_lambda * math.pi * self.window_radius_R**2


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled set of interferer distances plus the fixed typical distance.

    Immutable after creation; the typical pair is never part of `distances`.
    """

    interferer_distances: np.ndarray
    typical_distance_r0: float

    def __post_init__(self):
        object.__setattr__(
            self, "interferer_distances",
            np.asarray(self.interferer_distances, dtype=float),
        )
        if self.interferer_distances.ndim != 1:
            raise ValueError("interferer_distances must be one-dimensional")
        if self.interferer_distances.size and not np.all(self.interferer_distances > 0.0):
            raise ValueError("interferer distances must be strictly positive")
        if self.typical_distance_r0 <= 0.0:
            raise ValueError("typical_distance_r0 must be > 0")

    @property
    def num_interferers(self) -> int:
        return int(self.interferer_distances.size)


def sample_ppp(config: PppConfig, rng: np.random.Generator) -> NetworkRealization:
    """Draw one realization: Poisson count, uniform placement in the disk.

    Uniform placement in a disk of radius R gives distance density 2z/R^2 on
    (0, R], sampled by inverse transform as R*sqrt(U).
    """
    n = int(rng.poisson(config.mean_count))
    distances = config.window_radius_R * np.sqrt(rng.random(n))
    # guard against an exactly-zero uniform draw (distance support is open at 0)
    if n:
        np.maximum(distances, np.finfo(float).tiny, out=distances)
    return NetworkRealization(distances, config.typical_distance_r0)


class InterferenceMean(NamedTuple):
    value: float
    divergent: bool


def expected_interference_mean(
    config: PppConfig, alpha: float, r_min: float = 1e-3
) -> InterferenceMean:
    """Campbell mean of the raw path-loss sum over the window, 2*pi*lambda*Int z^(1-alpha) dz.

    A window-adequacy diagnostic: `divergent` is set when the integral keeps
    growing with the window (alpha <= 2; logarithmic exactly at alpha = 2).
    For alpha >= 2 the value is regularized with the inner cutoff `r_min`.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be > 0")
    if not 0.0 < r_min < config.window_radius_R:
        raise ValueError("r_min must lie in (0, window_radius_R)")
    lam = config.intensity_lambda
    R = config.window_radius_R
    if lam == 0.0:
        return InterferenceMean(0.0, False)
    if alpha == 2.0:
        return InterferenceMean(2.0 * math.pi * lam * math.log(R / r_min), True)
    lower = r_min if alpha > 2.0 else 0.0
    integral = (R ** (2.0 - alpha) - lower ** (2.0 - alpha)) / (2.0 - alpha)
    return InterferenceMean(2.0 * math.pi * lam * integral, alpha < 2.0)


def realization_to_json(config: PppConfig, realization: NetworkRealization) -> str:
    """Serialize a realization (with its sampling window) for replay."""
    record = {
        "lambda": config.intensity_lambda,
        "R": config.window_radius_R,
        "r0": realization.typical_distance_r0,
        "distances": realization.interferer_distances.tolist(),
    }
    return json.dumps(record)


def realization_from_json(text: str) -> tuple[PppConfig, NetworkRealization]:
    record = json.loads(text)
    config = PppConfig(record["lambda"], record["R"], record["r0"])
    realization = NetworkRealization(np.asarray(record["distances"], dtype=float), record["r0"])
    return config, realization
