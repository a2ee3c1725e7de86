"""
app.py
Batch command-line entry point.
Run with: python app.py <command> [--config FILE] [flags]

Commands: pmf, moments, jumps, simulate, scale, ruin, exit, validate.
Exit codes: 0 success, 2 configuration error, 3 computation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from dotenv import load_dotenv
load_dotenv()

from loguru import logger

from src.config import get_settings
from src.errors import ConfigError
from src.pipeline.graph import run
from src.pipeline.planner import COMMAND_NODES
from src.run_config import parse_config

# flag name -> argparse type; dest follows the config key
_VALUE_FLAGS: dict[str, type] = {
    "lambda": float,
    "n": int,
    "t": float,
    "k": int,
    "c": float,
    "sigma": float,
    "delta": float,
    "mixture": str,
    "q": float,
    "theta": str,
    "x": str,
    "a": float,
    "h": float,
    "xmax": float,
    "tol": float,
    "eps": float,
    "paths": int,
    "seed": int,
    "barrier-eps": float,
    "workers": int,
    "out": str,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mipp",
        description="Multiply iterated Poisson process distributions and risk-model ruin quantities.",
    )
    parser.add_argument("command", nargs="?", choices=COMMAND_NODES, help="what to compute")
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    for flag, kind in _VALUE_FLAGS.items():
        parser.add_argument(f"--{flag}", type=kind, dest=flag.replace("-", "_"), default=None)
    parser.add_argument("--mc", action="store_true", default=None, help="add Monte Carlo columns")
    parser.add_argument("--print-config", action="store_true", help="echo the resolved configuration")
    return parser


def _configure_logging() -> None:
    cfg = get_settings().logging
    logger.remove()
    logger.add(sys.stderr, level=cfg.level, format=cfg.format)


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)

    flags = {
        key: value
        for key, value in vars(args).items()
        if key not in ("config", "print_config")
    }
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else None
    except OSError as exc:
        logger.error(f"[Cli] cannot read {args.config}: {exc}")
        return 2

    try:
        config = parse_config(text, flags)
    except ConfigError as exc:
        logger.error(f"[Cli] invalid configuration: {exc}")
        return 2

    if args.print_config:
        sys.stdout.write("\n".join(config.canonical_lines()) + "\n")
        return 0

    return run(config)


if __name__ == "__main__":
    sys.exit(main())
