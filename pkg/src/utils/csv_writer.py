"""
src/utils/csv_writer.py
Writes result tables as CSV: header row, floats at 17 significant digits,
'\n' line endings, optional '# key=value' comment lines above the header.
"""

from __future__ import annotations

from pathlib import Path

import polars as pl
from loguru import logger

from src.config import get_settings


def format_floats(frame: pl.DataFrame, digits: int | None = None) -> pl.DataFrame:
    """Float columns become strings in %.{digits}g form; other columns pass through."""
    digits = get_settings().output.float_digits if digits is None else digits
    pattern = f".{digits}g"
    return frame.with_columns([
        pl.col(name).map_elements(lambda v: format(v, pattern), return_dtype=pl.Utf8)
        for name, dtype in frame.schema.items()
        if dtype.is_float()
    ])


def format_value(value: float, digits: int | None = None) -> str:
    digits = get_settings().output.float_digits if digits is None else digits
    return format(value, f".{digits}g")


def render_table(frame: pl.DataFrame, comments: dict[str, object] | None = None) -> str:
    lines = []
    for key, value in (comments or {}).items():
        text = format_value(value) if isinstance(value, float) else str(value)
        lines.append(f"# {key}={text}\n")
    return "".join(lines) + format_floats(frame).write_csv(line_terminator="\n")


def write_table(
    frame: pl.DataFrame,
    path: Path | str,
    comments: dict[str, object] | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(render_table(frame, comments))
    logger.success(f"[CsvWriter] wrote {frame.height} rows to {path}")
    return path
