"""
src/simulation/bridge.py
Exact barrier tests for a Brownian segment pinned at both endpoints.

For a bridge of variance sigma^2 dt whose endpoints sit at distances a, b
on the same side of a level, P(the bridge touches the level) is
exp(-2 a b / (sigma^2 dt)). With two levels in play the segment is split
at a sampled midpoint until one of them becomes negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from src.errors import DomainError

NEGLIGIBLE = 1e-12


@dataclass(frozen=True)
class SegmentExit:
    event: str  # "ruin" or "barrier"
    offset: float  # midpoint of the sub-segment where the level was reached


def crossing_probability(a: float, b: float, variance: float) -> float:
    """Chance that a bridge with endpoint distances a, b reaches the level."""
    if a <= 0.0 or b <= 0.0:
        return 1.0
    return math.exp(-2.0 * a * b / variance)


def segment_exit(
    rng: np.random.Generator,
    start: float,
    end: float,
    sigma: float,
    dt: float,
    upper: float | None,
    depth: int,
) -> SegmentExit | None:
    """
    First of {drop below 0, reach upper} on a bridge from start to end over dt,
    or None when the bridge stays inside. One uniform is drawn per test.
    """
    variance = sigma * sigma * dt
    if start <= 0.0:
        # a Brownian path started at 0 goes negative immediately
        return SegmentExit("ruin", dt * 2.0 ** -(depth + 1))
    p_low = crossing_probability(start, end, variance)
    p_up = 0.0 if upper is None else crossing_probability(upper - start, upper - end, variance)

    if p_up < NEGLIGIBLE or p_low < NEGLIGIBLE or depth == 0:
        u = float(rng.random())
        if u < p_low:
            return SegmentExit("ruin", 0.5 * dt)
        if u < p_low + p_up:
            return SegmentExit("barrier", 0.5 * dt)
        return None

    mid = float(rng.normal(0.5 * (start + end), 0.5 * sigma * math.sqrt(dt)))
    half = 0.5 * dt
    first = segment_exit(rng, start, mid, sigma, half, upper, depth - 1)
    if first is not None:
        return first
    second = segment_exit(rng, mid, end, sigma, half, upper, depth - 1)
    if second is None:
        return None
    return SegmentExit(second.event, half + second.offset)


def drifted_bm_ruin(x: float, drift: float, sigma: float, horizon: float) -> float:
    """
    P(min_{s <= T} (x + drift s + sigma B_s) < 0)
        = Phi((-x - drift T)/(sigma sqrt T)) + e^{-2 drift x / sigma^2} Phi((-x + drift T)/(sigma sqrt T)).
    """
    if x < 0.0:
        raise DomainError(f"x must be >= 0, got {x}")
    if not (sigma > 0.0 and horizon > 0.0):
        raise DomainError("need sigma > 0 and horizon > 0")
    scale = sigma * math.sqrt(horizon)
    first = norm.cdf((-x - drift * horizon) / scale)
    # the reflected term in log space: e^{-2 drift x / sigma^2} may overflow alone
    second = math.exp(
        -2.0 * drift * x / sigma**2 + norm.logcdf((-x + drift * horizon) / scale)
    )
    return float(min(first + second, 1.0))
