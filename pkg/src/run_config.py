"""
src/run_config.py
RunConfig: one fully resolved batch run. Built from a plain key=value
file merged with command-line flags (flags win). Unknown keys are errors.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.config import get_settings
from src.errors import ConfigError
from src.mipp.types import MippParams
from src.ruin.model import ClaimComponent, RiskModel
from src.ruin.scale import Grid
from src.utils.csv_writer import format_value

Command = Literal["pmf", "moments", "jumps", "simulate", "scale", "ruin", "exit", "validate"]


def _numerics():
    return get_settings().numerics


def _simulation():
    return get_settings().simulation


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    command: Command

    # MIPP
    lam: float = Field(default=1.0, alias="lambda", gt=0, allow_inf_nan=False)
    n: int = Field(default=2, ge=1)
    t: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    k: int = Field(default=10, ge=0)

    # risk model
    c: float = Field(default=2.0, gt=0, allow_inf_nan=False)
    sigma: float = Field(default=0.5, ge=0, allow_inf_nan=False)
    delta: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    mixture: tuple[tuple[float, float], ...] | None = None
    q: float = Field(default=0.0, ge=0, allow_inf_nan=False)
    theta: tuple[float, ...] = ()
    x: tuple[float, ...] = (1.0,)
    a: float = Field(default=3.0, gt=0, allow_inf_nan=False)

    # numerics
    h: float = Field(default_factory=lambda: _numerics().h, gt=0)
    xmax: float = Field(default_factory=lambda: _numerics().x_max, gt=0)
    tol: float = Field(default_factory=lambda: _numerics().tol, gt=0)
    eps: float = Field(default_factory=lambda: _numerics().eps, gt=0, lt=1)

    # simulation
    paths: int = Field(default_factory=lambda: _simulation().n_paths, gt=0)
    seed: int = Field(default_factory=lambda: _simulation().master_seed, ge=0, lt=2**64)
    barrier_eps: float = Field(default_factory=lambda: _simulation().barrier_eps, gt=0, lt=1)
    workers: int = Field(default_factory=lambda: _simulation().workers, ge=1)
    mc: bool = False

    out: str | None = None

    @field_validator("theta", "x", mode="before")
    @classmethod
    def _split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(part.strip() for part in value.split(",") if part.strip())
        if isinstance(value, (int, float)):
            return (value,)
        return value

    @field_validator("theta")
    @classmethod
    def _positive_theta(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if any(not th > 0.0 for th in value):
            raise ValueError("every theta must be positive")
        return value

    @field_validator("x")
    @classmethod
    def _capital_list(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("at least one initial capital is needed")
        if any(not (v >= 0.0 and math.isfinite(v)) for v in value):
            raise ValueError("initial capital must be finite and >= 0")
        return value

    @field_validator("mixture", mode="before")
    @classmethod
    def _split_mixture(cls, value: Any) -> Any:
        if isinstance(value, str):
            pairs = []
            for part in value.split(","):
                alpha, sep, delta = part.partition(":")
                if not sep:
                    raise ValueError(f"mixture entry {part!r} is not alpha:delta")
                pairs.append((alpha.strip(), delta.strip()))
            return tuple(pairs)
        return value

    @field_validator("mixture")
    @classmethod
    def _valid_mixture(cls, value):
        if value is None:
            return value
        if not value:
            raise ValueError("mixture needs at least one component")
        if any(not (alpha > 0.0 and delta > 0.0) for alpha, delta in value):
            raise ValueError("mixture weights and rates must be positive")
        if abs(sum(alpha for alpha, _ in value) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        return value

    # ── Derived objects ──────────────────────────────────────────────────────

    def mipp_params(self) -> MippParams:
        return MippParams(lam=self.lam, n=self.n)

    def risk_model(self) -> RiskModel:
        if self.mixture is None:
            return RiskModel.single(self.c, self.sigma, self.lam, self.delta)
        claims = tuple(ClaimComponent(alpha=a, delta=d) for a, d in self.mixture)
        return RiskModel(c=self.c, sigma=self.sigma, lam=self.lam, claims=claims)

    def grid(self) -> Grid:
        return Grid.covering(self.h, self.xmax)

    def output_path(self) -> Path:
        if self.out is not None:
            return Path(self.out)
        return Path(get_settings().output.directory) / f"{self.command}.csv"

    def canonical_lines(self) -> list[str]:
        """key=value lines in sorted key order, floats at full precision."""
        lines = []
        for key, value in sorted(self.model_dump(by_alias=True).items()):
            lines.append(f"{key}={_render(key, value)}")
        return lines


def _render(key: str, value: Any) -> str:
    if value is None:
        return ""
    if key == "mixture":
        return ",".join(f"{format_value(a)}:{format_value(d)}" for a, d in value)
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format_value(value)
    return str(value)


def parse_text(text: str) -> dict[str, str]:
    """key=value lines; blank lines and lines starting with '#' are skipped."""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(key or f"line {number}", f"expected key=value, got {raw!r}")
        values[key] = value.strip()
    return values


def parse_config(text: str | None = None, flags: dict[str, Any] | None = None) -> RunConfig:
    """
    Merge file text with flag overrides and validate.

    Raises:
        ConfigError: unknown key, malformed value or violated constraint;
            `key` names the first offending entry.
    """
    merged: dict[str, Any] = parse_text(text) if text else {}
    merged.update({k: v for k, v in (flags or {}).items() if v is not None})
    # blank file values mean "use the default"
    merged = {k: v for k, v in merged.items() if v != ""}
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = str(first["loc"][0]) if first["loc"] else "config"
        raise ConfigError(key, first["msg"]) from exc
