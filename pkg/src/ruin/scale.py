"""
src/ruin/scale.py
The q-scale function of the MIPP-driven risk process as a convolution
series on a uniform grid.

With Fy(z) = (lam (1 - e^{-lam}) + q)/c - (lam e^{-lam}/c) (pi * G)(z),
    W(x) = (1/c) sum_n pi * Fy^{*n} * F_{n+1}(x)      (sigma > 0)
    W(x) = (1/c) sum_n pi * Fy^{*n}(x)                (sigma = 0)
where F_{n+1} is the Erlang(n+1, 2c/sigma^2) density and G the Bessel
kernel whose transform is exp(lam sum_j alpha_j delta_j/(delta_j+b)) - 1.
The 1/c factor is what makes the Laplace transform equal 1/(psi - q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import polars as pl
from loguru import logger
from scipy.special import gammainc

from src.config import get_settings
from src.errors import DomainError, TruncationError
from src.ruin.bessel import bessel_i1e
from src.ruin.model import RiskModel
from src.utils.convolution import erlang_convolve, running_integral, trapezoid_convolve


@dataclass(frozen=True)
class Grid:
    """Uniform nodes x_k = k h, k = 0 .. m-1."""

    h: float
    m: int

    def __post_init__(self) -> None:
        if not self.h > 0.0:
            raise DomainError(f"grid step must be positive, got {self.h}")
        if self.m < 2:
            raise DomainError(f"grid needs at least 2 points, got {self.m}")

    @classmethod
    def covering(cls, h: float, x_max: float) -> "Grid":
        return cls(h=h, m=int(math.ceil(x_max / h - 1e-9)) + 1)

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(self.m)

    @property
    def x_max(self) -> float:
        return (self.m - 1) * self.h


@dataclass(frozen=True)
class KernelTable:
    grid: Grid
    g_values: np.ndarray
    digamma_values: np.ndarray


@dataclass(frozen=True)
class ScaleTable:
    grid: Grid
    q: float
    values: np.ndarray
    terms_used: int
    series_tail_bound: float

    def at(self, x: float) -> float:
        if not 0.0 <= x <= self.grid.x_max + 1e-12:
            raise DomainError(f"x={x} outside the tabulated range [0, {self.grid.x_max}]")
        return float(np.interp(x, self.grid.x, self.values))

    def header(self) -> dict[str, object]:
        return {"q": self.q, "terms_used": self.terms_used, "series_tail_bound": self.series_tail_bound}

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame({"x": self.grid.x, "W": self.values})


# ── Kernels ──────────────────────────────────────────────────────────────────

def component_kernel(x: np.ndarray, rate: float, delta: float) -> np.ndarray:
    """e^{-delta x} sqrt(rate / x) I_1(2 sqrt(rate x)), equal to `rate` at x = 0."""
    out = np.full_like(x, rate)
    pos = x > 0.0
    z = 2.0 * np.sqrt(rate * x[pos])
    out[pos] = np.sqrt(rate / x[pos]) * np.exp(z - delta * x[pos]) * bessel_i1e(z)
    return out


def kernel_tables(model: RiskModel, q: float, grid: Grid) -> KernelTable:
    """
    Tabulates G and the signed kernel Fy. For a mixture, G is accumulated
    as P <- P + G_i + P * G_i, i.e. prod_i (1 + G_i^) - 1 in transform space.
    """
    if not q >= 0.0:
        raise DomainError(f"q must be >= 0, got {q}")
    x, h = grid.x, grid.h
    lam, c = model.lam, model.c

    g = np.zeros_like(x)
    for comp in model.claims:
        g_i = component_kernel(x, lam * comp.alpha * comp.delta, comp.delta)
        g = g + g_i + trapezoid_convolve(g, g_i, h)

    digamma = (lam * (-math.expm1(-lam)) + q) / c - (lam * math.exp(-lam) / c) * running_integral(g, h)
    return KernelTable(grid=grid, g_values=g, digamma_values=digamma)


# ── Scale function ───────────────────────────────────────────────────────────

def _factorial_tail(y: float, last: int) -> float:
    """sum_{n > last} y^n / n! = e^y P(last + 1, y)."""
    if y <= 0.0:
        return 0.0
    p = float(gammainc(last + 1, y))
    return math.exp(y + math.log(p)) if p > 0.0 else 0.0


def scale_function(
    model: RiskModel,
    q: float,
    grid: Grid,
    tol: float | None = None,
    max_terms: int | None = None,
) -> ScaleTable:
    """
    W^(q) on the grid. Terms are added until the sup-norm of the newest
    one drops below tol * c.

    Raises:
        TruncationError: the series did not settle within max_terms.
    """
    numerics = get_settings().numerics
    tol = numerics.tol if tol is None else tol
    max_terms = numerics.max_terms if max_terms is None else max_terms
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")

    kernel = kernel_tables(model, q, grid)
    fy, h, c = kernel.digamma_values, grid.h, model.c
    rate = 2.0 * c / model.sigma**2 if model.sigma > 0.0 else math.inf

    def smooth(s: np.ndarray, order: int) -> np.ndarray:
        return s if math.isinf(rate) else erlang_convolve(s, order, rate, h)

    # n = 0: pi * F_1 (or pi itself when sigma = 0)
    values = smooth(np.ones(grid.m), 1) / c
    power = None
    latest = math.inf
    n = 0
    while latest >= tol * c:
        n += 1
        if n >= max_terms:
            raise TruncationError(
                "scale-function series did not converge",
                achieved=latest,
                diagnostics={"terms": n, "q": q, "x_max": grid.x_max},
            )
        power = fy.copy() if power is None else trapezoid_convolve(power, fy, h)
        term = smooth(running_integral(power, h), n + 1) / c
        values = values + term
        latest = float(np.max(np.abs(term)))

    bound = _factorial_tail(float(np.max(np.abs(fy))) * grid.x_max, n) / c
    logger.info(
        f"[ScaleFunction] q={q} sigma={model.sigma} m={grid.m} "
        f"terms={n + 1} tail<={bound:.2e}"
    )
    return ScaleTable(
        grid=grid, q=q, values=values, terms_used=n + 1, series_tail_bound=bound
    )
