"""
src/ruin/exits.py
Survival, ruin and two-sided exit probabilities read off the scale
function, the survival barrier used by the Monte Carlo estimator, and the
Laplace-identity self-check that certifies a tabulated W.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from src.config import get_settings
from src.errors import DegenerateInputError, DomainError, TruncationError
from src.ruin.model import RiskModel, net_profit, phi_q, psi_R, psi_prime_zero
from src.ruin.scale import Grid, ScaleTable, scale_function
from src.utils.csv_writer import write_table

_W_FLOOR = 1e-300


def _default_grid(x_needed: float) -> Grid:
    numerics = get_settings().numerics
    return Grid.covering(numerics.h, max(numerics.x_max, x_needed))


def _require_net_profit(model: RiskModel) -> None:
    if not net_profit(model):
        raise DomainError(
            "net-profit condition violated: c <= lam^2 * E[claim] "
            f"(c={model.c}, lam={model.lam}, E[claim]={model.mean_claim}); "
            "survival probability is 0 for every initial capital"
        )


def survival_curve(model: RiskModel, table: ScaleTable) -> np.ndarray:
    """psi'(0+) W(x) on the grid of a q = 0 table, clamped to [0, 1]."""
    _require_net_profit(model)
    if table.q != 0.0:
        raise DomainError("survival needs the q = 0 scale function")
    return np.clip(psi_prime_zero(model) * table.values, 0.0, 1.0)


def survival_probability(
    model: RiskModel,
    x: float,
    grid: Grid | None = None,
    tol: float | None = None,
    table: ScaleTable | None = None,
) -> float:
    """P_x(surplus never drops below 0) = psi'(0+) W(x)."""
    _require_net_profit(model)
    if not x >= 0.0:
        raise DomainError(f"initial capital must be >= 0, got {x}")
    if table is None:
        table = scale_function(model, 0.0, grid or _default_grid(x), tol)
    value = psi_prime_zero(model) * table.at(x)
    if value > 1.0 + 1e-6:
        logger.warning(f"[Survival] clamping survival {value:.8f} at x={x}")
    return min(max(value, 0.0), 1.0)


def ruin_probability(
    model: RiskModel,
    x: float,
    grid: Grid | None = None,
    tol: float | None = None,
    table: ScaleTable | None = None,
) -> float:
    return 1.0 - survival_probability(model, x, grid, tol, table)


def two_sided_exit(
    model: RiskModel,
    q: float,
    x: float,
    a: float,
    grid: Grid | None = None,
    tol: float | None = None,
    table: ScaleTable | None = None,
) -> float:
    """E_x[e^{-q tau_a^+}; tau_a^+ < tau_0^-] = W^(q)(x) / W^(q)(a)."""
    if not 0.0 <= x <= a:
        raise DomainError(f"need 0 <= x <= a, got x={x}, a={a}")
    if table is None:
        table = scale_function(model, q, grid or _default_grid(a), tol)
    elif table.q != q:
        raise DomainError(f"table was built for q={table.q}, not q={q}")
    w_a = table.at(a)
    if w_a < _W_FLOOR:
        raise DegenerateInputError(f"W({a}) = {w_a} is below the numeric floor")
    return table.at(x) / w_a


def laplace_identity_residual(
    model: RiskModel,
    q: float,
    theta: float,
    grid: Grid | None = None,
    tol: float | None = None,
    table: ScaleTable | None = None,
) -> float:
    """
    Relative gap between the quadrature of e^{-theta x} W(x) and
    1 / (psi(theta) - q). The part beyond x_max is added from the growth
    bound W(x) <= C e^{Phi(q) x}, C taken from the last decade of the table.
    """
    phi = phi_q(model, q)
    if not theta > phi:
        raise DomainError(f"theta={theta} must exceed Phi(q)={phi}")
    if table is None:
        table = scale_function(model, q, grid or _default_grid(0.0), tol)
    x, w = table.grid.x, table.values

    quad = float(trapezoid(np.exp(-theta * x) * w, dx=table.grid.h))
    decade = slice(int(0.9 * table.grid.m), None)
    growth = float(np.max(w[decade] * np.exp(-phi * x[decade])))
    x_max = table.grid.x_max
    tail = growth * math.exp((phi - theta) * x_max) / (theta - phi)

    target = 1.0 / (psi_R(model, theta) - q)
    return abs(quad + tail - target) / target


def survival_barrier(
    model: RiskModel,
    barrier_eps: float,
    tol: float | None = None,
) -> float:
    """Smallest grid level B with survival(B) >= 1 - barrier_eps."""
    if not 0.0 < barrier_eps < 1.0:
        raise DomainError(f"barrier_eps must lie in (0, 1), got {barrier_eps}")
    sim = get_settings().simulation
    grid = Grid.covering(sim.barrier_grid_h, sim.barrier_x_max)
    curve = survival_curve(model, scale_function(model, 0.0, grid, tol))
    hits = np.nonzero(curve >= 1.0 - barrier_eps)[0]
    if hits.size == 0:
        raise TruncationError(
            "survival never reaches 1 - barrier_eps on the barrier grid",
            achieved=1.0 - float(curve[-1]),
            diagnostics={"barrier_x_max": sim.barrier_x_max},
        )
    barrier = float(grid.x[hits[0]])
    logger.info(f"[Survival] barrier B={barrier:.4f} for eps={barrier_eps}")
    return barrier


def write_scale_table(table: ScaleTable, path: Path | str) -> Path:
    """CSV x,W with the series diagnostics in the header comments."""
    return write_table(table.to_frame(), path, comments=table.header())
