"""
src/simulation/martingales.py
Monte Carlo means of the MIPP martingales at a fixed time.

  linear       V_t - lam^n t                                   (mean 0)
  quadratic    M_t^2 - Var-rate * t,  M_t = V_t - lam^n t      (mean 0)
  exponential  e^{alpha t + beta V_t}
               - (alpha + l_n(beta)) int_0^t e^{alpha s + beta V_s} ds   (mean 1)
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from src.config import get_settings
from src.errors import DomainError
from src.mipp.distribution import char_exponent
from src.mipp.moments import moments_closed
from src.mipp.types import MippParams
from src.simulation.paths import Path, simulate_mipp
from src.simulation.streams import path_rng

MartingaleKind = Literal["linear", "quadratic", "exponential"]


def _exp_integral(alpha: float, start: float, stop: float) -> float:
    """int_start^stop e^{alpha s} ds."""
    if alpha == 0.0:
        return stop - start
    return math.exp(alpha * start) * math.expm1(alpha * (stop - start)) / alpha


def exponential_martingale(path: Path, alpha: float, beta: float, drift: float) -> float:
    """The integral term is summed exactly over the constant stretches of the path."""
    knots = np.concatenate(([0.0], path.jump_times, [path.t_end]))
    levels = np.concatenate(([0], np.cumsum(path.jump_sizes)))
    integral = sum(
        math.exp(beta * float(level)) * _exp_integral(alpha, float(a), float(b))
        for level, a, b in zip(levels, knots[:-1], knots[1:])
    )
    terminal = math.exp(alpha * path.t_end + beta * float(levels[-1]))
    return terminal - (alpha + drift) * integral


def martingale_check(
    kind: MartingaleKind,
    params: MippParams,
    t: float,
    n_paths: int,
    master_seed: int | None = None,
    beta: float = -0.5,
    alpha: float | None = None,
) -> tuple[float, float]:
    """
    Empirical mean and standard error over n_paths paths, path i on stream i.
    For the exponential kind alpha defaults to -l_n(beta), which removes the
    integral term.
    """
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if n_paths < 2:
        raise DomainError(f"n_paths must be >= 2, got {n_paths}")
    master_seed = get_settings().simulation.master_seed if master_seed is None else master_seed

    mean_rate = params.lam**params.n
    # the closed variance already switches to n t near lam = 1
    var_t = moments_closed(params, t).variance
    drift = char_exponent(params, beta) if kind == "exponential" else 0.0
    alpha = -drift if alpha is None else alpha

    samples = np.empty(n_paths)
    for i in range(n_paths):
        path = simulate_mipp(params, t, path_rng(master_seed, i))
        value = path.terminal_value
        if kind == "linear":
            samples[i] = value - mean_rate * t
        elif kind == "quadratic":
            samples[i] = (value - mean_rate * t) ** 2 - var_t
        elif kind == "exponential":
            samples[i] = exponential_martingale(path, alpha, beta, drift)
        else:
            raise DomainError(f"unknown martingale kind {kind!r}")
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n_paths))
