"""
src/simulation/risk.py
Event-driven simulation of the MIPP-driven surplus and the Monte Carlo
ruin and exit estimators built on it.

Between base-layer epochs the surplus is c t + sigma B_t; crossings inside
a segment are decided with exact bridge tests, so there is no time-step
bias. Paths run in chunks, each path on its own counter-based stream.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FilePath

import numpy as np
import polars as pl
from loguru import logger

from src.config import get_settings
from src.errors import DomainError
from src.ruin.exits import survival_barrier
from src.ruin.model import RiskModel, net_profit
from src.simulation.bridge import segment_exit
from src.simulation.streams import path_rng
from src.utils.csv_writer import write_table


@dataclass(frozen=True)
class RiskOutcome:
    ruined: bool
    ruin_time: float | None
    exit_level_hit: bool
    terminal_surplus: float
    exit_time: float | None = None
    ruin_time_approximate: bool = False
    capped: bool = False
    events: tuple[tuple[float, str, float], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.ruined and self.ruin_time is None:
            raise DomainError("a ruined outcome needs a ruin time")
        if self.ruined and self.exit_level_hit:
            raise DomainError("ruin and barrier exit are mutually exclusive")


@dataclass(frozen=True)
class RuinEstimate:
    p_hat: float
    stderr: float
    n_paths: int
    tail_bias_bound: float
    barrier: float
    capped_paths: int = 0


@dataclass(frozen=True)
class ExitEstimate:
    value: float
    stderr: float
    n_paths: int


# ── Single path ──────────────────────────────────────────────────────────────

def _aggregate_claim(model: RiskModel, rng: np.random.Generator) -> float:
    """Sum of Poisson(lam) claims from the exponential mixture."""
    count = int(rng.poisson(model.lam))
    if count == 0:
        return 0.0
    if model.is_single_exponential:
        return float(rng.exponential(1.0 / model.claims[0].delta, size=count).sum())
    weights = np.array([comp.alpha for comp in model.claims])
    means = np.array([1.0 / comp.delta for comp in model.claims])
    picks = rng.choice(weights.size, size=count, p=weights)
    return float(rng.exponential(means[picks]).sum())


def simulate_risk(
    model: RiskModel,
    x: float,
    upper_barrier: float | None,
    horizon: float,
    rng: np.random.Generator,
    record: bool = False,
) -> RiskOutcome:
    """
    One surplus path from x until ruin, the upper barrier or the horizon.
    Draw order per epoch: gap, Brownian increment, bridge tests, claim count,
    claim sizes.
    """
    if not x >= 0.0:
        raise DomainError(f"initial capital must be >= 0, got {x}")
    if not horizon > 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    depth = get_settings().simulation.bridge_depth
    events: list[tuple[float, str, float]] = []

    def finish(**kwargs) -> RiskOutcome:
        return RiskOutcome(events=tuple(events), **kwargs)

    if upper_barrier is not None and x >= upper_barrier:
        if record:
            events.append((0.0, "barrier", x))
        return finish(ruined=False, ruin_time=None, exit_level_hit=True, terminal_surplus=x, exit_time=0.0)

    c, sigma = model.c, model.sigma
    t, s = 0.0, x
    while True:
        gap = float(rng.exponential(1.0 / model.lam)) if model.lam > 0.0 else math.inf
        at_horizon = gap >= horizon - t
        dt = horizon - t if at_horizon else gap
        end = s + c * dt
        if sigma > 0.0:
            end += sigma * math.sqrt(dt) * float(rng.standard_normal())
            crossed = segment_exit(rng, s, end, sigma, dt, upper_barrier, depth)
            if crossed is not None:
                when = t + crossed.offset
                if crossed.event == "ruin":
                    if record:
                        events.append((when, "ruin", 0.0))
                    return finish(
                        ruined=True, ruin_time=when, exit_level_hit=False,
                        terminal_surplus=0.0, ruin_time_approximate=True,
                    )
                if record:
                    events.append((when, "barrier", upper_barrier))
                return finish(
                    ruined=False, ruin_time=None, exit_level_hit=True,
                    terminal_surplus=upper_barrier, exit_time=when,
                )
        elif upper_barrier is not None and end >= upper_barrier:
            when = t + (upper_barrier - s) / c
            if record:
                events.append((when, "barrier", upper_barrier))
            return finish(
                ruined=False, ruin_time=None, exit_level_hit=True,
                terminal_surplus=upper_barrier, exit_time=when,
            )

        t, s = t + dt, end
        if at_horizon:
            if record:
                events.append((horizon, "horizon", s))
            return finish(
                ruined=False, ruin_time=None, exit_level_hit=False, terminal_surplus=s, capped=True
            )

        claim = _aggregate_claim(model, rng)
        if claim > 0.0:
            s -= claim
            if record:
                events.append((t, "claim", s))
            if s < 0.0:
                if record:
                    events.append((t, "ruin", s))
                return finish(ruined=True, ruin_time=t, exit_level_hit=False, terminal_surplus=s)


def path_frame(outcome: RiskOutcome) -> pl.DataFrame:
    """Columns t, event, surplus of a path simulated with record=True."""
    return pl.DataFrame(
        {
            "t": [e[0] for e in outcome.events],
            "event": [e[1] for e in outcome.events],
            "surplus": [e[2] for e in outcome.events],
        },
        schema={"t": pl.Float64, "event": pl.Utf8, "surplus": pl.Float64},
    )


def write_path_dump(outcome: RiskOutcome, path: FilePath | str) -> FilePath:
    return write_table(path_frame(outcome), path)


# ── Estimators ───────────────────────────────────────────────────────────────

def _chunks(n_paths: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk_size, n_paths)) for lo in range(0, n_paths, chunk_size)]


def _ruin_chunk(
    model: RiskModel, x: float, barrier: float, horizon: float, master_seed: int, lo: int, hi: int
) -> tuple[int, int]:
    ruined = capped = 0
    for stream_id in range(lo, hi):
        out = simulate_risk(model, x, barrier, horizon, path_rng(master_seed, stream_id))
        if out.ruined:
            ruined += 1
        elif out.capped:
            capped += 1
    return ruined, capped


def _exit_chunk(
    model: RiskModel, x: float, a: float, q: float, horizon: float, master_seed: int, lo: int, hi: int
) -> tuple[float, float]:
    total = squares = 0.0
    for stream_id in range(lo, hi):
        out = simulate_risk(model, x, a, horizon, path_rng(master_seed, stream_id))
        if out.exit_level_hit:
            value = math.exp(-q * out.exit_time)
            total += value
            squares += value * value
    return total, squares


def _run_chunks(worker, args: tuple, n_paths: int, workers: int | None, chunk_size: int | None) -> list:
    sim = get_settings().simulation
    workers = sim.workers if workers is None else workers
    chunk_size = sim.chunk_size if chunk_size is None else chunk_size
    bounds = _chunks(n_paths, chunk_size)
    los = [lo for lo, _ in bounds]
    his = [hi for _, hi in bounds]
    repeated = [[a] * len(bounds) for a in args]
    # results come back in chunk order whatever the worker count
    if workers <= 1:
        return list(map(worker, *repeated, los, his))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, *repeated, los, his))


def _horizon(model: RiskModel) -> float:
    return get_settings().simulation.horizon_cap_factor / model.lam


def estimate_ruin(
    model: RiskModel,
    x: float,
    n_paths: int,
    barrier_eps: float | None = None,
    master_seed: int | None = None,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> RuinEstimate:
    """
    Infinite-horizon ruin probability. Paths stop as survivors at the
    barrier B where analytic survival is >= 1 - barrier_eps; paths reaching
    the hard horizon cap count as ruined and are tallied separately.
    """
    if not net_profit(model):
        raise DomainError(
            "net-profit condition c > lam^2 E[claim] fails; infinite-horizon ruin "
            "estimation is refused"
        )
    if n_paths < 1:
        raise DomainError(f"n_paths must be >= 1, got {n_paths}")
    sim = get_settings().simulation
    barrier_eps = sim.barrier_eps if barrier_eps is None else barrier_eps
    master_seed = sim.master_seed if master_seed is None else master_seed

    barrier = survival_barrier(model, barrier_eps)
    logger.info(f"[RuinEstimator] x={x} paths={n_paths} barrier={barrier:.4f}")
    results = _run_chunks(
        _ruin_chunk, (model, x, barrier, _horizon(model), master_seed), n_paths, workers, chunk_size
    )
    ruined = sum(r for r, _ in results)
    capped = sum(k for _, k in results)
    if capped:
        logger.warning(f"[RuinEstimator] {capped} paths hit the horizon cap, counted as ruined")

    p_hat = (ruined + capped) / n_paths
    return RuinEstimate(
        p_hat=p_hat,
        stderr=math.sqrt(p_hat * (1.0 - p_hat) / n_paths),
        n_paths=n_paths,
        tail_bias_bound=barrier_eps,
        barrier=barrier,
        capped_paths=capped,
    )


def estimate_exit(
    model: RiskModel,
    x: float,
    a: float,
    q: float,
    n_paths: int,
    master_seed: int | None = None,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> ExitEstimate:
    """Monte Carlo E_x[e^{-q tau_a^+}; tau_a^+ < tau_0^-]."""
    if not 0.0 <= x <= a:
        raise DomainError(f"need 0 <= x <= a, got x={x}, a={a}")
    if not q >= 0.0:
        raise DomainError(f"q must be >= 0, got {q}")
    if n_paths < 2:
        raise DomainError(f"n_paths must be >= 2, got {n_paths}")
    master_seed = get_settings().simulation.master_seed if master_seed is None else master_seed

    results = _run_chunks(
        _exit_chunk, (model, x, a, q, _horizon(model), master_seed), n_paths, workers, chunk_size
    )
    total = sum(t for t, _ in results)
    squares = sum(s for _, s in results)
    mean = total / n_paths
    variance = max(squares / n_paths - mean * mean, 0.0) * n_paths / (n_paths - 1)
    logger.info(f"[ExitEstimator] x={x} a={a} q={q} mean={mean:.6f}")
    return ExitEstimate(value=mean, stderr=math.sqrt(variance / n_paths), n_paths=n_paths)
