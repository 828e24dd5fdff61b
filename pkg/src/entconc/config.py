"""Run configurations for the command-line experiments.

Each config validates itself on construction, so a bad flag surfaces as a
``ValueError`` before any simulation starts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


def theta_from(theta: float | None, cos2: float | None, default_cos2: float) -> float:
    """Resolve the pair angle from either --theta (radians) or --cos2."""
    if theta is not None and cos2 is not None:
        raise ValueError("give either theta or cos2, not both")
    if theta is None:
        cos2 = default_cos2 if cos2 is None else cos2
        if not 0.0 < cos2 < 1.0:
            raise ValueError(f"cos2 must lie in (0, 1), got {cos2}")
        return math.acos(math.sqrt(cos2))
    if not 0.0 < theta < math.pi / 2:
        raise ValueError(f"theta must lie in (0, pi/2), got {theta}")
    return theta


def _check_ns(ns, lo: int = 1, hi: int | None = None):
    if not ns:
        raise ValueError("at least one n is required")
    for n in ns:
        if n < lo or (hi is not None and n > hi):
            raise ValueError(f"n={n} outside the supported range [{lo}, {hi or 'inf'}]")


@dataclass(frozen=True)
class Fig1Config:
    grid_points: int = 99
    n_list: tuple = (2, 4, 8, 32)

    def __post_init__(self):
        if self.grid_points < 1:
            raise ValueError("grid_points must be positive")
        _check_ns(self.n_list)

    def grid(self) -> list:
        """Evenly spaced cos^2 values strictly inside (0, 1)."""
        g = self.grid_points + 1
        return [i / g for i in range(1, g)]


@dataclass(frozen=True)
class ConcentrateConfig:
    theta: float
    n: int = 8
    epsilon: float = 0.1
    batches: int = 1000
    trials: int = 200
    seed: int = 0

    def __post_init__(self):
        theta_from(self.theta, None, 0.5)
        _check_ns([self.n])
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive; with epsilon = 0 the walk may never stop")
        if self.batches < 1 or self.trials < 1:
            raise ValueError("batches and trials must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class QDCConfig:
    theta: float
    n_list: tuple = (4, 8, 16, 32, 64)
    delta: float = 0.25

    def __post_init__(self):
        theta_from(self.theta, None, 0.5)
        _check_ns(self.n_list, hi=4096)
        if not self.delta > 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class DiluteConfig:
    theta: float
    n_list: tuple = (10,)
    delta: float = 0.25
    trials: int = 1
    seed: int = 0
    dense: bool | None = field(default=None)

    def __post_init__(self):
        theta_from(self.theta, None, 0.5)
        _check_ns(self.n_list, hi=4096)
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
