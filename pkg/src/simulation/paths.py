"""
src/simulation/paths.py
Exact-in-distribution sampling of MIPP values and paths.

V_1^(d) is drawn layer by layer: count <- Poisson(lam * count), d times,
starting from count = 1. A path of V^(n) on [0, t_end] is the base Poisson
layer at rate lam with an independent V_1^(n-1) increment at every base
epoch; only strictly positive increments are kept as jumps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.errors import DomainError
from src.mipp.types import MippParams


@dataclass(frozen=True)
class Path:
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    t_end: float

    def __post_init__(self) -> None:
        if self.jump_times.shape != self.jump_sizes.shape:
            raise DomainError("jump_times and jump_sizes differ in length")
        if self.jump_times.size:
            if np.any(np.diff(self.jump_times) <= 0.0):
                raise DomainError("jump_times must be strictly increasing")
            if self.jump_times[0] <= 0.0 or self.jump_times[-1] > self.t_end:
                raise DomainError("jump_times must lie in (0, t_end]")
            if np.any(self.jump_sizes < 1):
                raise DomainError("zero-size events are not jumps")

    @property
    def terminal_value(self) -> int:
        return int(self.jump_sizes.sum())

    def value_at(self, t: float) -> int:
        """V_t, right-continuous."""
        upto = np.searchsorted(self.jump_times, t, side="right")
        return int(self.jump_sizes[:upto].sum())


def _check_depth(lam: float, depth: int) -> None:
    if not lam > 0.0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")


def sample_v1(lam: float, depth: int, rng: np.random.Generator) -> int:
    """One draw of V_1^(depth)."""
    _check_depth(lam, depth)
    count = 1
    for _ in range(depth):
        if count == 0:
            break
        count = int(rng.poisson(lam * count))
    return count


def sample_v1_batch(lam: float, depth: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """size independent draws of V_1^(depth), all layers drawn in one call each."""
    _check_depth(lam, depth)
    counts = np.ones(size, dtype=np.int64)
    for _ in range(depth):
        counts = rng.poisson(lam * counts)
    return counts


def simulate_mipp(params: MippParams, t_end: float, rng: np.random.Generator) -> Path:
    if not t_end > 0.0:
        raise DomainError(f"t_end must be positive, got {t_end}")
    lam, n = params.lam, params.n

    # Poisson count, then the epochs as sorted uniforms
    count = int(rng.poisson(lam * t_end))
    epochs = np.sort(rng.uniform(0.0, t_end, size=count))
    if n == 1:
        sizes = np.ones(count, dtype=np.int64)
    else:
        sizes = sample_v1_batch(lam, n - 1, count, rng)

    keep = sizes > 0
    times, sizes = epochs[keep], sizes[keep]
    # a uniform draw of exactly 0.0 is possible in floating point
    if times.size and times[0] <= 0.0:
        times, sizes = times[1:], sizes[1:]
    return Path(jump_times=times, jump_sizes=sizes, t_end=float(t_end))


def sample_first_jump(params: MippParams, rng: np.random.Generator) -> tuple[float, int]:
    """(J_1, V(J_1)): base epochs are walked until the first positive increment."""
    lam, n = params.lam, params.n
    elapsed = 0.0
    while True:
        elapsed += float(rng.exponential(1.0 / lam))
        size = 1 if n == 1 else sample_v1(lam, n - 1, rng)
        if size > 0:
            return elapsed, size


def sojourn_times(path: Path) -> np.ndarray:
    """Holding times between consecutive jumps, the first measured from 0."""
    return np.diff(path.jump_times, prepend=0.0)
