"""
src/mipp
Exact (truncated-series) distributions, transforms, moments and jump laws
of the multiply iterated Poisson process.
"""

from src.mipp.distribution import (
    char_exponent,
    exponent_consistency,
    first_jump_pmf,
    governing_residual,
    joint_mgf_first_jump,
    levy_measure,
    pmf,
    q_sequence,
    sojourn_rate,
    tilted_exponent,
)
from src.mipp.moments import (
    bell_moments,
    bell_polynomial,
    moment_bell,
    moments_closed,
    moments_from_raw,
    pmf_moments,
    raw_moments,
    skew_kurt_limits,
)
from src.mipp.types import LevyMass, MippParams, MomentSet, Pmf, QSequence

__all__ = [
    "LevyMass",
    "MippParams",
    "MomentSet",
    "Pmf",
    "QSequence",
    "bell_moments",
    "bell_polynomial",
    "char_exponent",
    "exponent_consistency",
    "first_jump_pmf",
    "governing_residual",
    "joint_mgf_first_jump",
    "levy_measure",
    "moment_bell",
    "moments_closed",
    "moments_from_raw",
    "pmf",
    "pmf_moments",
    "q_sequence",
    "raw_moments",
    "skew_kurt_limits",
    "sojourn_rate",
    "tilted_exponent",
]
