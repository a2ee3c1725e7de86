"""
src/pipeline/planner.py
The planner node: reads the command of the run and picks the computation
node that handles it. Runs first.
"""

from __future__ import annotations

from typing import Any

from loguru import logger

from src.pipeline.state import RunState

COMMAND_NODES = ("pmf", "moments", "jumps", "simulate", "scale", "ruin", "exit", "validate")


def planner_node(state: RunState) -> dict[str, Any]:
    """
    Reads:  state["config"]
    Writes: state["route"]
    """
    config = state["config"]
    route = config.command if config.command in COMMAND_NODES else "writer"
    logger.info(f"[Planner] command={config.command} | route={route} | out={config.output_path()}")
    return {"route": route}
