"""
src/ruin/model.py
The MIPP-driven surplus R_t = x + c t - (claims counted by V^(2)) + sigma W_t,
its Laplace exponent, the net-profit condition and the root Phi(q).
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq, minimize_scalar

from src.errors import DomainError, RangeError


class ClaimComponent(BaseModel):
    """One exponential component alpha * delta * e^{-delta x} of the claim law."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0)
    delta: float = Field(gt=0)


class RiskModel(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    c: float = Field(gt=0)
    sigma: float = Field(ge=0)
    lam: float = Field(alias="lambda", gt=0)
    claims: tuple[ClaimComponent, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "RiskModel":
        total = sum(comp.alpha for comp in self.claims)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, expected 1")
        return self

    @classmethod
    def single(cls, c: float, sigma: float, lam: float, delta: float) -> "RiskModel":
        return cls(c=c, sigma=sigma, lam=lam, claims=(ClaimComponent(alpha=1.0, delta=delta),))

    @property
    def mean_claim(self) -> float:
        return sum(comp.alpha / comp.delta for comp in self.claims)

    @property
    def is_single_exponential(self) -> bool:
        return len(self.claims) == 1


def psi_R(model: RiskModel, theta: float) -> float:
    """
    Laplace exponent, E exp(theta (R_t - x)) = exp(t psi(theta)):
        c theta - lam + lam exp(-lam + lam sum_j alpha_j delta_j / (delta_j + theta))
        + sigma^2 theta^2 / 2.
    """
    if not theta >= 0.0:
        raise DomainError(f"psi_R is evaluated for theta >= 0, got {theta}")
    lam = model.lam
    claim_lt = sum(c.alpha * c.delta / (c.delta + theta) for c in model.claims)
    try:
        jump_part = lam * math.exp(-lam + lam * claim_lt)
    except OverflowError as exc:
        raise RangeError(f"psi_R overflows at theta={theta}") from exc
    return model.c * theta - lam + jump_part + 0.5 * model.sigma**2 * theta**2


def psi_prime_zero(model: RiskModel) -> float:
    """psi'(0+) = c - lam^2 sum_j alpha_j / delta_j (the mean drift of R)."""
    return model.c - model.lam**2 * model.mean_claim


def net_profit(model: RiskModel) -> bool:
    """Net-profit condition c > lam^2 E[xi] (c delta > lam^2 for one component)."""
    return psi_prime_zero(model) > 0.0


def phi_q(model: RiskModel, q: float) -> float:
    """Largest root of psi(theta) = q on [0, infinity)."""
    if not q >= 0.0:
        raise DomainError(f"q must be >= 0, got {q}")
    drift = psi_prime_zero(model)
    if q == 0.0 and drift >= 0.0:
        return 0.0

    hi = 1.0
    for _ in range(200):
        if psi_R(model, hi) > q:
            break
        hi *= 2.0
    else:
        raise RangeError(f"could not bracket Phi({q})")

    if q > 0.0:
        lo = 0.0
    else:
        # negative drift: psi dips below zero before its largest root
        lo = float(
            minimize_scalar(
                lambda th: psi_R(model, th), bounds=(0.0, hi), method="bounded"
            ).x
        )
    return float(brentq(lambda th: psi_R(model, th) - q, lo, hi, xtol=1e-14))


def expected_drift(model: RiskModel) -> float:
    """E[R_1 - x] = c - lam^2 / delta by Wald's identity."""
    _require_single(model)
    return psi_prime_zero(model)


def printed_expected_drift(model: RiskModel) -> float:
    """The printed expression c - exp(-lam + lam exp(-lam + lam/delta)), kept for comparison."""
    _require_single(model)
    lam, delta = model.lam, model.claims[0].delta
    return model.c - math.exp(-lam + lam * math.exp(-lam + lam / delta))


def _require_single(model: RiskModel) -> None:
    if not model.is_single_exponential:
        raise DomainError("the drift identity is stated for single-exponential claims")
