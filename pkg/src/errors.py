"""
src/errors.py
Exception hierarchy shared by every computation module.
The CLI maps ConfigError to exit code 2 and every other MippError to 3.
"""

from __future__ import annotations

from typing import Any


class MippError(Exception):
    """Base class for all library errors."""


class DomainError(MippError, ValueError):
    """An input lies outside the region where the quantity is defined."""


class DegenerateInputError(DomainError):
    """Input is formally valid but numerically degenerate (e.g. W(a) ~ 0)."""


class RangeError(MippError, OverflowError):
    """A result overflows double precision."""


class TruncationError(MippError):
    """
    A truncated series or support could not reach the requested tolerance.
    `achieved` carries the best bound that was reached.
    """

    def __init__(
        self,
        message: str,
        achieved: float,
        diagnostics: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(f"{message} (achieved bound {achieved:.3e})")
        self.achieved = achieved
        self.diagnostics = diagnostics or {}


class ConfigError(MippError):
    """Run configuration is invalid; `key` names the offending entry."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


class DivergenceError(DomainError):
    """A requested limit does not exist as a finite number."""
