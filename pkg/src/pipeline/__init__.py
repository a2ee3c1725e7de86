"""
src/pipeline
Batch orchestration: planner, command nodes, writer and the validation suite.
"""

from src.pipeline.graph import build_graph, run, run_graph

__all__ = ["build_graph", "run", "run_graph"]
