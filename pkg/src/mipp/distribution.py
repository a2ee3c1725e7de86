"""
src/mipp/distribution.py
Exact distributions, transforms and jump laws of the MIPP.

Everything here is a pure function of its inputs. Mass tables come from
the conditioning recursion
    P(V_t^(n) = k) = sum_j Poisson(k; lam * j) * P(V_t^(n-1) = j),
evaluated in log space with certified truncation of both sums.
"""

from __future__ import annotations

import math

import numpy as np
from loguru import logger
from scipy import stats
from scipy.special import gammainc, gammaln, logsumexp, xlogy

from src.config import get_settings
from src.errors import DomainError, RangeError, TruncationError
from src.mipp.types import LevyMass, MippParams, Pmf, QSequence


# ── Helpers ──────────────────────────────────────────────────────────────────

def _default_eps(eps: float | None) -> float:
    eps = get_settings().numerics.eps if eps is None else eps
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return eps


def _poisson_upper_tail(k: int, mu: np.ndarray | float) -> np.ndarray:
    """P(N > k) for N ~ Poisson(mu); valid at mu = 0."""
    return gammainc(k + 1, mu)


def _poisson_cutoff(eps: float, mu: float) -> int:
    """Smallest K with P(Poisson(mu) > K) <= eps."""
    if mu <= 0.0:
        return 0
    guess = stats.poisson.isf(eps, mu)
    k = int(guess) if np.isfinite(guess) else int(mu)
    while k > 0 and _poisson_upper_tail(k - 1, mu) <= eps:
        k -= 1
    while _poisson_upper_tail(k, mu) > eps:
        k += 1
    return k


def _log_poisson(k: np.ndarray, mu: np.ndarray) -> np.ndarray:
    # xlogy keeps the mu = 0 column finite at k = 0 and -inf elsewhere
    return xlogy(k, mu) - mu - gammaln(k + 1.0)


# ── Characteristic exponent ──────────────────────────────────────────────────

def char_exponent(params: MippParams, theta: float) -> float:
    """
    l_n(theta) with E exp(theta V_t) = exp(t l_n(theta)).
    l_1(theta) = lam (e^theta - 1), l_n = lam (e^{l_{n-1}} - 1).
    """
    if math.isnan(theta):
        raise DomainError("theta is NaN")
    lam = params.lam
    try:
        value = lam * math.expm1(theta)
        for _ in range(params.n - 1):
            value = lam * math.expm1(value)
    except OverflowError as exc:
        raise RangeError(
            f"characteristic exponent overflows for n={params.n}, theta={theta}"
        ) from exc
    if not math.isfinite(value):
        raise RangeError(
            f"characteristic exponent overflows for n={params.n}, theta={theta}"
        )
    return value


def tilted_exponent(params: MippParams, theta: float, z: float) -> float:
    """Exponent of V under the exponentially tilted measure P^theta."""
    return char_exponent(params, z + theta) - char_exponent(params, theta)


# ── Probability mass function ────────────────────────────────────────────────

def _pmf_level(lam: float, n: int, t: float, eps: float, cap: int, block: int) -> Pmf:
    if t == 0.0:
        return Pmf(masses=np.ones(1), tail_bound=0.0, t=t)

    if n == 1:
        mu = lam * t
        k_max = _poisson_cutoff(eps, mu)
        if k_max > cap:
            raise TruncationError(
                "Poisson support exceeds max_support",
                achieved=float(_poisson_upper_tail(cap, mu)),
                diagnostics={"n": n, "support": k_max, "cap": cap},
            )
        k = np.arange(k_max + 1, dtype=float)
        masses = np.exp(_log_poisson(k, np.full_like(k, mu)))
        tail = float(_poisson_upper_tail(k_max, mu))
        return Pmf(masses=masses, tail_bound=tail, t=t)

    # Half the budget goes to the inner level, half to the outer cut.
    inner = _pmf_level(lam, n - 1, t, eps / 2.0, cap, block)
    j = np.arange(inner.masses.size, dtype=float)
    mu = lam * j
    k_max = _poisson_cutoff(eps / 2.0, float(mu[-1]))
    if k_max > cap:
        achieved = inner.tail_bound + float(
            np.dot(inner.masses, _poisson_upper_tail(cap, mu))
        )
        raise TruncationError(
            "MIPP support exceeds max_support",
            achieved=achieved,
            diagnostics={"n": n, "support": k_max, "cap": cap},
        )

    with np.errstate(divide="ignore"):
        log_inner = np.log(inner.masses)
    # rows of k in blocks so the k x j log-term matrix stays within the budget
    rows = max(1, block // j.size)
    masses = np.empty(k_max + 1)
    for start in range(0, k_max + 1, rows):
        k = np.arange(start, min(start + rows, k_max + 1), dtype=float)
        log_terms = _log_poisson(k[:, None], mu[None, :]) + log_inner[None, :]
        masses[start : start + k.size] = np.exp(logsumexp(log_terms, axis=1))

    outer_tail = float(np.dot(inner.masses, _poisson_upper_tail(k_max, mu)))
    tail = inner.tail_bound + outer_tail
    return Pmf(masses=masses, tail_bound=tail, t=t)


def pmf(params: MippParams, t: float, eps: float | None = None) -> Pmf:
    """
    Mass table of V_t^(n) with a certified tail bound <= eps.

    Raises:
        DomainError: t < 0 or eps outside (0, 1).
        TruncationError: the support needed for eps exceeds max_support.
    """
    if t < 0.0 or math.isnan(t):
        raise DomainError(f"t must be >= 0, got {t}")
    eps = _default_eps(eps)
    numerics = get_settings().numerics
    table = _pmf_level(
        params.lam, params.n, float(t), eps, numerics.max_support, numerics.pmf_block_elements
    )
    logger.debug(
        f"[Pmf] lam={params.lam} n={params.n} t={t} "
        f"support={table.masses.size} tail={table.tail_bound:.2e}"
    )
    return table


# ── Jump structure ───────────────────────────────────────────────────────────

def q_sequence(lam: float, m: int) -> QSequence:
    """q_1 = 1 - e^{-lam}, q_j = 1 - e^{-lam q_{j-1}} for j = 2 .. m."""
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be positive and finite, got {lam}")
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    values = [-math.expm1(-lam)]
    for _ in range(m - 1):
        values.append(-math.expm1(-lam * values[-1]))
    return QSequence(lam=lam, values=tuple(values))


def sojourn_rate(params: MippParams) -> float:
    """Exponential rate lam * q_{n-1} of every holding time of V^(n)."""
    if params.n == 1:
        return params.lam
    return params.lam * q_sequence(params.lam, params.n - 1)[params.n - 1]


def _require_iterated(params: MippParams) -> None:
    if params.n < 2:
        raise DomainError("operation requires n >= 2")


def first_jump_pmf(params: MippParams, eps: float | None = None) -> Pmf:
    """Law of the first jump size: P(V_1^(n-1) = k) / q_{n-1} for k >= 1."""
    _require_iterated(params)
    base = pmf(MippParams(lam=params.lam, n=params.n - 1), 1.0, eps)
    q = q_sequence(params.lam, params.n - 1)[params.n - 1]
    masses = base.masses.copy()
    masses[0] = 0.0
    return Pmf(masses=masses / q, tail_bound=base.tail_bound / q, t=1.0)


def joint_mgf_first_jump(params: MippParams, s1: float, s2: float) -> float:
    """
    E[exp(s1 J_1 + s2 V(J_1))] = 1 + (s1 + l_n(s2)) / (lam q_{n-1} - s1),
    finite for s1 < lam q_{n-1}. At s2 = 0 this is lam q / (lam q - s1).
    """
    _require_iterated(params)
    rate = sojourn_rate(params)
    if not s1 < rate:
        raise DomainError(
            f"s1={s1} outside convergence region s1 < lam*q = {rate}"
        )
    return 1.0 + (s1 + char_exponent(params, s2)) / (rate - s1)


def levy_measure(
    params: MippParams,
    theta: float,
    kmax: int,
    eps: float | None = None,
    tol: float = 1e-9,
) -> list[LevyMass]:
    """
    Atoms lam e^{k theta} P(V_1^(n-1) = k), k = 0 .. kmax. The k = 0 atom
    is reported with is_jump=False and never counts towards the jump rate.
    """
    _require_iterated(params)
    if kmax < 0:
        raise DomainError(f"kmax must be >= 0, got {kmax}")
    inner_params = MippParams(lam=params.lam, n=params.n - 1)
    base = pmf(inner_params, 1.0, eps)

    probs = np.zeros(kmax + 1)
    take = min(kmax + 1, base.masses.size)
    probs[:take] = base.masses[:take]
    k = np.arange(kmax + 1, dtype=float)
    with np.errstate(divide="ignore"):
        masses = params.lam * np.exp(k * theta + np.log(probs))

    # lam * E exp(theta V_1^(n-1)) is the full tilted mass, k = 0 included
    total = params.lam * math.exp(char_exponent(inner_params, theta))
    tail = max(total - float(masses.sum()), 0.0)
    if tail > tol * total:
        raise TruncationError(
            f"Levy measure tail beyond kmax={kmax} is not negligible",
            achieved=tail,
            diagnostics={"total_mass": total, "kmax": kmax, "theta": theta},
        )
    return [
        LevyMass(k=i, mass=float(m), is_jump=i > 0) for i, m in enumerate(masses)
    ]


# ── Consistency checks ───────────────────────────────────────────────────────

def governing_residual(
    params: MippParams,
    t: float,
    k: int,
    dt: float,
    eps: float = 1e-14,
) -> float:
    """
    |d/dt P(V_t = k) - RHS| with a central difference on the left and
        RHS = -lam q_{n-1} P(V_t = k) + sum_{j=1..k} nu_n(j) P(V_t = k - j).
    eps is kept tiny because truncation noise enters divided by dt.
    """
    _require_iterated(params)
    if not 0.0 < dt < t:
        raise DomainError(f"need 0 < dt < t, got dt={dt}, t={t}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")

    ahead = pmf(params, t + dt, eps).at(k)
    behind = pmf(params, t - dt, eps).at(k)
    derivative = (ahead - behind) / (2.0 * dt)

    now = pmf(params, t, eps)
    nu = params.lam * pmf(MippParams(lam=params.lam, n=params.n - 1), 1.0, eps).masses
    rhs = -sojourn_rate(params) * now.at(k)
    for j in range(1, k + 1):
        if j < nu.size:
            rhs += nu[j] * now.at(k - j)
    return abs(derivative - rhs)


def exponent_consistency(
    params: MippParams,
    t: float,
    theta: float,
    eps: float | None = None,
) -> float:
    """|sum_k P(V_t = k) e^{theta k} - e^{t l_n(theta)}| for theta <= 0."""
    if theta > 0.0:
        raise DomainError("exponent consistency is checked for theta <= 0 only")
    table = pmf(params, t, eps)
    lhs = float(np.dot(table.masses, np.exp(theta * table.support)))
    rhs = math.exp(t * char_exponent(params, theta))
    return abs(lhs - rhs)
