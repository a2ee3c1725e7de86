"""
scripts/generate_reference_outputs.py
Runs every command on the reference model (c=2, lambda=1, delta=1,
sigma=0.5) and adds a plot-ready survival sweep over sigma.
Run: python scripts/generate_reference_outputs.py
"""

from pathlib import Path
import sys

import numpy as np
import polars as pl

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.pipeline.graph import run
from src.ruin.exits import survival_curve
from src.ruin.scale import Grid, scale_function
from src.run_config import parse_config
from src.utils.csv_writer import write_table

OUT = Path("data/reference")
REFERENCE = {"c": 2.0, "lambda": 1.0, "delta": 1.0, "sigma": 0.5}
COMMANDS = ("pmf", "moments", "jumps", "simulate", "scale", "ruin", "exit")


def survival_sweep(sigmas=(0.0, 0.25, 0.5, 1.0), x_max: float = 15.0, h: float = 0.01) -> pl.DataFrame:
    grid = Grid.covering(h, x_max)
    frames = []
    for sigma in sigmas:
        config = parse_config(None, {**REFERENCE, "command": "ruin", "sigma": sigma})
        model = config.risk_model()
        curve = survival_curve(model, scale_function(model, 0.0, grid))
        frames.append(pl.DataFrame({"sigma": np.full(grid.m, sigma), "x": grid.x, "survival": curve}))
    return pl.concat(frames)


if __name__ == "__main__":
    codes = {}
    for command in COMMANDS:
        config = parse_config(None, {**REFERENCE, "command": command, "out": str(OUT / f"{command}.csv")})
        codes[command] = run(config)
    write_table(survival_sweep(), OUT / "survival_by_sigma.csv")
    failed = [c for c, code in codes.items() if code != 0]
    print(f"✓ Wrote {len(COMMANDS) + 1} tables → {OUT}" if not failed else f"✗ Failed: {failed}")
    sys.exit(1 if failed else 0)
