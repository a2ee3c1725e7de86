"""
src/simulation/streams.py
Counter-based random streams. The stream of a path is a pure function of
(master_seed, stream_id), so results do not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.errors import DomainError

_SEED_LIMIT = 2**64


@dataclass(frozen=True)
class StreamSeed:
    master_seed: int
    stream_id: int

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < _SEED_LIMIT:
            raise DomainError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.stream_id < 0:
            raise DomainError(f"stream_id must be >= 0, got {self.stream_id}")


def make_rng(seed: StreamSeed) -> np.random.Generator:
    """Philox keyed by SeedSequence([master_seed, stream_id])."""
    sequence = np.random.SeedSequence([seed.master_seed, seed.stream_id])
    return np.random.Generator(np.random.Philox(sequence))


def path_rng(master_seed: int, stream_id: int) -> np.random.Generator:
    return make_rng(StreamSeed(master_seed, stream_id))
