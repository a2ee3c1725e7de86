"""Shared fixtures: the reference MIPP, the reference risk model and small grids."""

from __future__ import annotations

import pytest

from src.mipp.types import MippParams
from src.ruin.model import ClaimComponent, RiskModel
from src.ruin.scale import Grid

SEED = 20240611


@pytest.fixture
def params() -> MippParams:
    return MippParams(lam=1.0, n=2)


@pytest.fixture
def model() -> RiskModel:
    """c=2, lam=1, delta=1, sigma=0.5; net profit holds with psi'(0+) = 1."""
    return RiskModel.single(c=2.0, sigma=0.5, lam=1.0, delta=1.0)


@pytest.fixture
def mixture_model() -> RiskModel:
    return RiskModel(
        c=2.0,
        sigma=0.5,
        lam=1.0,
        claims=(ClaimComponent(alpha=0.5, delta=1.0), ClaimComponent(alpha=0.5, delta=2.0)),
    )


@pytest.fixture
def coarse_grid() -> Grid:
    return Grid.covering(0.01, 20.0)


@pytest.fixture
def seed() -> int:
    return SEED
