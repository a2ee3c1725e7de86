"""
src/pipeline/executor.py
The command nodes. Each one runs a computation for the resolved
RunConfig and writes a result table back to RunState; the writer node
turns it into the CSV artifact and the exit code.
"""

from __future__ import annotations

import os
from dataclasses import asdict
from typing import Any

import polars as pl
from loguru import logger

from src.errors import ConfigError, MippError
from src.mipp.distribution import first_jump_pmf, pmf, q_sequence, sojourn_rate
from src.mipp.moments import bell_moments, moments_closed, skew_kurt_limits
from src.pipeline.state import RunState
from src.pipeline.validation import checks_frame, render_checks, run_validation
from src.ruin.exits import survival_probability, two_sided_exit
from src.ruin.scale import Grid, scale_function
from src.simulation.risk import estimate_exit, estimate_ruin, path_frame, simulate_risk
from src.simulation.streams import path_rng
from src.utils.csv_writer import write_table


def _guarded(name: str, state: RunState, compute) -> dict[str, Any]:
    """Runs one computation; a MippError is stored in state instead of raised."""
    logger.info(f"[{name}] running")
    try:
        return {**compute(state["config"]), "error": None}
    except MippError as exc:
        logger.error(f"[{name}] failed: {exc}")
        return {"error": exc}


# ── Distribution commands ────────────────────────────────────────────────────

def _pmf(config) -> dict[str, Any]:
    table = pmf(config.mipp_params(), config.t, config.eps)
    frame = pl.DataFrame({"k": table.support, "probability": table.masses})
    comments = {"lambda": config.lam, "n": config.n, "t": config.t, "tail_bound": table.tail_bound}
    return {"table": frame, "comments": comments}


def _moments(config) -> dict[str, Any]:
    params = config.mipp_params()
    closed = moments_closed(params, config.t)
    bell = bell_moments(params, config.t, config.eps)
    names = ("mean", "variance", "skewness", "kurtosis")
    frame = pl.DataFrame(
        {
            "moment": list(names),
            "value": [getattr(closed, n) for n in names],
            "bell_value": [getattr(bell, n) for n in names],
        }
    )
    comments: dict[str, object] = {"lambda": config.lam, "n": config.n, "t": config.t}
    if config.lam > 1.0:
        skew, kurt = skew_kurt_limits(config.lam, config.t)
        comments.update({"skewness_limit": skew, "kurtosis_limit": kurt})
    return {"table": frame, "comments": comments}


def _jumps(config) -> dict[str, Any]:
    params = config.mipp_params()
    table = first_jump_pmf(params, config.eps)
    frame = pl.DataFrame({"k": table.support, "first_jump_probability": table.masses})
    comments = {
        "sojourn_rate": sojourn_rate(params),
        "q": q_sequence(params.lam, params.n - 1)[params.n - 1],
        "tail_bound": table.tail_bound,
    }
    return {"table": frame, "comments": comments}


# ── Risk commands ────────────────────────────────────────────────────────────

def _simulate(config) -> dict[str, Any]:
    model = config.risk_model()
    outcome = simulate_risk(
        model, config.x[0], config.a, config.t, path_rng(config.seed, 0), record=True
    )
    comments = {"x": config.x[0], "a": config.a, "horizon": config.t, "seed": config.seed}
    return {"table": path_frame(outcome), "comments": comments}


def _scale(config) -> dict[str, Any]:
    table = scale_function(config.risk_model(), config.q, config.grid(), config.tol)
    return {"table": table.to_frame(), "comments": table.header()}


def _ruin(config) -> dict[str, Any]:
    model = config.risk_model()
    grid = Grid.covering(config.h, max(config.xmax, *config.x))
    table = scale_function(model, 0.0, grid, config.tol)
    survival = [survival_probability(model, x, table=table) for x in config.x]
    columns: dict[str, list] = {
        "x": list(config.x),
        "analytic_survival": survival,
        "analytic_ruin": [1.0 - s for s in survival],
    }
    comments: dict[str, object] = {"series_tail_bound": table.series_tail_bound}
    if config.mc:
        estimates = [
            estimate_ruin(model, x, config.paths, config.barrier_eps, config.seed, workers=config.workers)
            for x in config.x
        ]
        columns["mc_ruin"] = [e.p_hat for e in estimates]
        columns["mc_stderr"] = [e.stderr for e in estimates]
        comments.update(
            {
                "paths": config.paths,
                "barrier": estimates[0].barrier,
                "tail_bias_bound": config.barrier_eps,
                "capped_paths": sum(e.capped_paths for e in estimates),
            }
        )
    return {"table": pl.DataFrame(columns), "comments": comments}


def _exit(config) -> dict[str, Any]:
    model = config.risk_model()
    grid = Grid.covering(config.h, max(config.xmax, config.a))
    table = scale_function(model, config.q, grid, config.tol)
    columns: dict[str, list] = {
        "x": list(config.x),
        "a": [config.a] * len(config.x),
        "q": [config.q] * len(config.x),
        "probability": [two_sided_exit(model, config.q, x, config.a, table=table) for x in config.x],
    }
    if config.mc:
        estimates = [
            estimate_exit(model, x, config.a, config.q, config.paths, config.seed, workers=config.workers)
            for x in config.x
        ]
        columns["mc_probability"] = [e.value for e in estimates]
        columns["mc_stderr"] = [e.stderr for e in estimates]
    return {"table": pl.DataFrame(columns), "comments": {}}


def _validate(config) -> dict[str, Any]:
    checks = run_validation(config)
    render_checks(checks)
    return {"table": checks_frame(checks), "comments": {}, "checks": [asdict(c) for c in checks]}


# ── Nodes ────────────────────────────────────────────────────────────────────

def pmf_node(state: RunState) -> dict[str, Any]:
    return _guarded("PmfNode", state, _pmf)


def moments_node(state: RunState) -> dict[str, Any]:
    return _guarded("MomentsNode", state, _moments)


def jumps_node(state: RunState) -> dict[str, Any]:
    return _guarded("JumpsNode", state, _jumps)


def simulate_node(state: RunState) -> dict[str, Any]:
    return _guarded("SimulateNode", state, _simulate)


def scale_node(state: RunState) -> dict[str, Any]:
    return _guarded("ScaleNode", state, _scale)


def ruin_node(state: RunState) -> dict[str, Any]:
    return _guarded("RuinNode", state, _ruin)


def exit_node(state: RunState) -> dict[str, Any]:
    return _guarded("ExitNode", state, _exit)


def validate_node(state: RunState) -> dict[str, Any]:
    return _guarded("ValidateNode", state, _validate)


# ── Writer Node ──────────────────────────────────────────────────────────────

def writer_node(state: RunState) -> dict[str, Any]:
    """
    Reads:  state["config"], state["table"], state["comments"], state["checks"], state["error"]
    Writes: state["artifact"], state["exit_code"]

    The table goes to '<out>.partial' first and is renamed into place, so a
    failed run never leaves a half-written artifact behind.
    """
    config = state["config"]
    target = config.output_path()
    partial = target.with_name(target.name + ".partial")
    error = state.get("error")

    if error is None:
        try:
            write_table(state["table"], partial, state.get("comments"))
            os.replace(partial, target)
        except OSError as exc:
            error = exc
    if error is not None:
        partial.unlink(missing_ok=True)
        code = 2 if isinstance(error, ConfigError) else 3
        logger.error(f"[Writer] {type(error).__name__}: {error} (exit {code})")
        return {"artifact": None, "exit_code": code}

    failed = [c["name"] for c in state.get("checks") or [] if not c["passed"]]
    if failed:
        logger.error(f"[Writer] {len(failed)} checks failed: {', '.join(failed)}")
        return {"artifact": str(target), "exit_code": 3}
    logger.success(f"[Writer] {config.command} -> {target}")
    return {"artifact": str(target), "exit_code": 0}
