"""
src/pipeline/state.py
Shared state of one batch run. Every node reads from it and writes back
to it; nothing is passed directly between nodes.
"""

from __future__ import annotations

from typing import Any

from typing_extensions import TypedDict

from src.run_config import RunConfig


class RunState(TypedDict, total=False):
    # Resolved configuration, written once before the graph starts
    config: RunConfig

    # Routing signal written by the planner: the command node to run
    route: str

    # Result table (polars DataFrame) and its '# key=value' header lines
    table: Any
    comments: dict[str, object]

    # validate only: one dict per named check
    checks: list[dict[str, Any]]

    # The MippError raised by a command node, if any
    error: Any

    # Written by the writer
    artifact: str | None
    exit_code: int
