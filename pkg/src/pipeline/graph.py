"""
src/pipeline/graph.py
Assembles the run nodes into a LangGraph StateGraph.

Flow:
  START → planner → one command node → writer → END
"""

from __future__ import annotations

from loguru import logger
from langgraph.graph import END, START, StateGraph

from src.pipeline.executor import (
    exit_node,
    jumps_node,
    moments_node,
    pmf_node,
    ruin_node,
    scale_node,
    simulate_node,
    validate_node,
    writer_node,
)
from src.pipeline.planner import COMMAND_NODES, planner_node
from src.pipeline.state import RunState
from src.run_config import RunConfig

_NODES = {
    "pmf": pmf_node,
    "moments": moments_node,
    "jumps": jumps_node,
    "simulate": simulate_node,
    "scale": scale_node,
    "ruin": ruin_node,
    "exit": exit_node,
    "validate": validate_node,
}


def _route_after_planner(state: RunState) -> str:
    route = state.get("route", "writer")
    if route not in COMMAND_NODES:
        return "writer"
    return route


def build_graph():
    """
    Builds and compiles the run graph.

    Usage:
        result = run_graph.invoke({"config": config})
        result["exit_code"]
    """
    builder = StateGraph(RunState)

    builder.add_node("planner", planner_node)
    for name, node in _NODES.items():
        builder.add_node(name, node)
    builder.add_node("writer", writer_node)

    builder.add_edge(START, "planner")
    builder.add_conditional_edges(
        "planner",
        _route_after_planner,
        {**{name: name for name in _NODES}, "writer": "writer"},
    )
    # every command node hands its table to the writer
    for name in _NODES:
        builder.add_edge(name, "writer")
    builder.add_edge("writer", END)

    return builder.compile()


run_graph = build_graph()


def run(config: RunConfig) -> int:
    """Runs one command end to end and returns its exit code."""
    result = run_graph.invoke({"config": config, "error": None, "checks": None})
    logger.info(f"[Graph] {config.command} finished with exit code {result['exit_code']}")
    return result["exit_code"]
