"""
src/simulation
Monte Carlo for MIPP paths and the MIPP-driven surplus, on reproducible
per-path random streams.
"""

from src.simulation.bridge import crossing_probability, drifted_bm_ruin, segment_exit
from src.simulation.martingales import exponential_martingale, martingale_check
from src.simulation.paths import (
    Path,
    sample_first_jump,
    sample_v1,
    sample_v1_batch,
    simulate_mipp,
    sojourn_times,
)
from src.simulation.risk import (
    ExitEstimate,
    RiskOutcome,
    RuinEstimate,
    estimate_exit,
    estimate_ruin,
    path_frame,
    simulate_risk,
    write_path_dump,
)
from src.simulation.streams import StreamSeed, make_rng, path_rng

__all__ = [
    "ExitEstimate",
    "Path",
    "RiskOutcome",
    "RuinEstimate",
    "StreamSeed",
    "crossing_probability",
    "drifted_bm_ruin",
    "estimate_exit",
    "estimate_ruin",
    "exponential_martingale",
    "make_rng",
    "martingale_check",
    "path_frame",
    "path_rng",
    "sample_first_jump",
    "sample_v1",
    "sample_v1_batch",
    "segment_exit",
    "simulate_mipp",
    "simulate_risk",
    "sojourn_times",
    "write_path_dump",
]
