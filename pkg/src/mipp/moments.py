"""
src/mipp/moments.py
Closed-form moments of V_t^(n), the Bell-polynomial route through the
mass table of the previous layer, and the large-n limits of skewness
and kurtosis.
"""

from __future__ import annotations

import math

import numpy as np

from src.config import get_settings
from src.errors import DivergenceError, DomainError, RangeError
from src.mipp.distribution import pmf
from src.mipp.types import MippParams, MomentSet, Pmf

MAX_BELL_ORDER = 4


def _power(base: float, exponent: int) -> float:
    try:
        value = base**exponent
    except OverflowError as exc:
        raise RangeError(f"{base}^{exponent} overflows") from exc
    if not math.isfinite(value):
        raise RangeError(f"{base}^{exponent} overflows")
    return value


def moments_closed(params: MippParams, t: float) -> MomentSet:
    """
    Mean, variance, skewness and kurtosis (non-excess, 3 for a Gaussian).
    Within lambda_one_threshold of lam = 1 the limit formulas are used.
    """
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    lam, n = params.lam, params.n
    big = _power(lam, n)
    mean = big * t

    if abs(lam - 1.0) < get_settings().numerics.lambda_one_threshold:
        return MomentSet(
            mean=mean,
            variance=n * t,
            skewness=(3 * n - 1) / (2.0 * math.sqrt(n * t)),
            kurtosis=(6 * n * n - 5 * n + 1) / (2.0 * n * t) + 3.0,
        )

    big2 = _power(big, 2)
    variance = big * t * (1.0 - big) / (1.0 - lam)
    skewness = (lam * big + 2.0 * big - 2.0 * lam - 1.0) / (
        (lam * lam - 1.0) * math.sqrt(variance)
    )
    numerator = (
        1.0 + 6.0 * lam + 5.0 * lam**2 + 6.0 * lam**3
        - 6.0 * big + 6.0 * big2
        - 12.0 * lam * big - 13.0 * lam**2 * big - 5.0 * lam**3 * big
        + 6.0 * lam * big2 + 5.0 * lam**2 * big2 + lam**3 * big2
    )
    denominator = big * (lam**2 - 1.0) * (lam**2 + lam + 1.0) * (big - 1.0) * t
    kurtosis = numerator / denominator + 3.0
    if not all(map(math.isfinite, (variance, skewness, kurtosis))):
        raise RangeError(f"moments overflow for lam={lam}, n={n}, t={t}")
    return MomentSet(mean, variance, skewness, kurtosis)


def pmf_moments(table: Pmf) -> MomentSet:
    """Moments of a truncated mass table (tail mass ignored)."""
    k = table.support.astype(float)
    p = table.masses
    mean = float(np.dot(p, k))
    centred = k - mean
    variance = float(np.dot(p, centred**2))
    sd = math.sqrt(variance)
    return MomentSet(
        mean=mean,
        variance=variance,
        skewness=float(np.dot(p, centred**3)) / sd**3,
        kurtosis=float(np.dot(p, centred**4)) / variance**2,
    )


def raw_moments(moments: MomentSet) -> tuple[float, float, float, float]:
    """E V, E V^2, E V^3, E V^4 rebuilt from a MomentSet."""
    m, v = moments.mean, moments.variance
    sd = math.sqrt(v)
    c3 = moments.skewness * sd**3
    c4 = moments.kurtosis * v * v
    return (
        m,
        v + m * m,
        c3 + 3.0 * m * v + m**3,
        c4 + 4.0 * m * c3 + 6.0 * m * m * v + m**4,
    )


def moments_from_raw(raw: tuple[float, float, float, float]) -> MomentSet:
    m1, m2, m3, m4 = raw
    variance = m2 - m1 * m1
    c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
    c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1**4
    return MomentSet(
        mean=m1,
        variance=variance,
        skewness=c3 / variance**1.5,
        kurtosis=c4 / variance**2,
    )


def bell_moments(params: MippParams, t: float, eps: float | None = None) -> MomentSet:
    """The four moments rebuilt from the Bell-polynomial raw moments."""
    raw = tuple(moment_bell(params, t, m, eps) for m in range(1, MAX_BELL_ORDER + 1))
    return moments_from_raw(raw)


def bell_polynomial(m: int, x: np.ndarray | float) -> np.ndarray:
    """B_m(x) = x * sum_{j<m} C(m-1, j) B_j(x), B_0 = 1."""
    x = np.asarray(x, dtype=float)
    bells = [np.ones_like(x)]
    for order in range(1, m + 1):
        acc = sum(math.comb(order - 1, j) * bells[j] for j in range(order))
        bells.append(x * acc)
    return bells[m]


def moment_bell(
    params: MippParams,
    t: float,
    m: int,
    eps: float | None = None,
) -> float:
    """E[(V_t^(n))^m] = sum_k P(V_t^(n-1) = k) B_m(lam k), m <= 4."""
    if not 0 <= m <= MAX_BELL_ORDER:
        raise DomainError(f"moment order must lie in 0..{MAX_BELL_ORDER}, got {m}")
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if params.n == 1:
        return float(bell_polynomial(m, params.lam * t))
    inner = pmf(MippParams(lam=params.lam, n=params.n - 1), t, eps)
    return float(np.dot(inner.masses, bell_polynomial(m, params.lam * inner.support)))


def skew_kurt_limits(lam: float, t: float) -> tuple[float, float]:
    """
    n -> infinity limits of skewness and kurtosis for lam > 1.
    The kurtosis limit keeps the +3 of the finite-n expression.
    """
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if lam <= 1.0:
        raise DivergenceError(
            f"skewness and kurtosis diverge as n grows when lam={lam} <= 1"
        )
    skew = (lam + 2.0) / ((lam + 1.0) * math.sqrt((lam - 1.0) * t))
    kurt = (6.0 + 6.0 * lam + 5.0 * lam**2 + lam**3) / (
        (lam**2 - 1.0) * (lam**2 + lam + 1.0) * t
    ) + 3.0
    return skew, kurt
