"""
src/mipp/types.py
Value types for the MIPP: parameters, mass tables, moment sets,
the q-sequence and Levy-measure atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class MippParams(BaseModel):
    """Common intensity `lam` of every Poisson layer and iteration depth `n`."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    n: int = Field(ge=1)

    @field_validator("lam")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("lambda must be finite")
        return v


@dataclass(frozen=True)
class Pmf:
    """
    Truncated mass table over k = 0 .. len(masses)-1.
    `tail_bound` bounds the omitted mass; when `exact_tail` is set it is the
    omitted mass itself (up to rounding).
    """

    masses: np.ndarray
    tail_bound: float
    t: float
    exact_tail: bool = True

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.masses.size)

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def at(self, k: int) -> float:
        return float(self.masses[k]) if 0 <= k < self.masses.size else 0.0


@dataclass(frozen=True)
class MomentSet:
    mean: float
    variance: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class QSequence:
    """q_j = P(V_1^(j) > 0) for j = 1 .. m (values[0] is q_1)."""

    lam: float
    values: tuple[float, ...]

    def __getitem__(self, j: int) -> float:
        # 1-based like the recursion it comes from
        return self.values[j - 1]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class LevyMass:
    """One atom of the (possibly tilted) Levy measure; k = 0 is not a jump."""

    k: int
    mass: float
    is_jump: bool
