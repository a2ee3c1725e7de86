import numpy as np
import pytest

from src.errors import DomainError
from src.ruin.exits import (
    laplace_identity_residual,
    ruin_probability,
    survival_barrier,
    survival_curve,
    survival_probability,
    two_sided_exit,
    write_scale_table,
)
from src.ruin.model import RiskModel, phi_q
from src.ruin.scale import scale_function


@pytest.fixture
def table0(model, coarse_grid):
    return scale_function(model, 0.0, coarse_grid)


def test_survival_is_a_distribution_function(model, table0):
    curve = survival_curve(model, table0)
    assert curve[0] == 0.0
    assert np.all(np.diff(curve) >= -1e-10)
    assert 0.98 < survival_probability(model, 15.0, table=table0) <= 1.0


def test_ruin_is_certain_from_zero_with_diffusion(model, table0):
    assert ruin_probability(model, 0.0, table=table0) == 1.0


def test_ruin_from_zero_without_diffusion(model, coarse_grid):
    drifting = model.model_copy(update={"sigma": 0.0})
    table = scale_function(drifting, 0.0, coarse_grid)
    # psi'(0+) / c = 1/2
    assert survival_probability(drifting, 0.0, table=table) == pytest.approx(0.5, abs=1e-12)


def test_net_profit_violation_is_refused():
    losing = RiskModel.single(c=0.5, sigma=0.5, lam=1.0, delta=1.0)
    with pytest.raises(DomainError, match="net-profit"):
        survival_probability(losing, 1.0)


def test_survival_needs_q_zero_table(model, coarse_grid):
    with pytest.raises(DomainError):
        survival_curve(model, scale_function(model, 0.1, coarse_grid))


@pytest.mark.parametrize("q", [0.0, 0.1])
@pytest.mark.parametrize("offset", [1.0, 2.0, 4.0])
def test_laplace_identity(model, coarse_grid, q, offset):
    table = scale_function(model, q, coarse_grid)
    theta = phi_q(model, q) + offset
    assert laplace_identity_residual(model, q, theta, table=table) < 5e-3


def test_laplace_identity_for_a_mixture(mixture_model, coarse_grid):
    assert laplace_identity_residual(mixture_model, 0.0, 2.0, coarse_grid) < 5e-3


def test_laplace_identity_needs_theta_above_root(model, coarse_grid):
    with pytest.raises(DomainError):
        laplace_identity_residual(model, 0.1, 0.01, coarse_grid)


def test_two_sided_exit_edges(model, coarse_grid):
    table = scale_function(model, 0.0, coarse_grid)
    assert two_sided_exit(model, 0.0, 3.0, 3.0, table=table) == 1.0
    assert two_sided_exit(model, 0.0, 0.0, 3.0, table=table) == 0.0


def test_two_sided_exit_monotonicity(model, coarse_grid):
    tables = {q: scale_function(model, q, coarse_grid) for q in (0.0, 1.0)}
    by_x = [two_sided_exit(model, 0.0, x, 3.0, table=tables[0.0]) for x in np.linspace(0.0, 3.0, 13)]
    assert all(b >= a for a, b in zip(by_x, by_x[1:]))
    by_a = [two_sided_exit(model, 0.0, 1.0, a, table=tables[0.0]) for a in (2.0, 3.0, 4.0)]
    assert all(b <= a for a, b in zip(by_a, by_a[1:]))
    assert two_sided_exit(model, 1.0, 1.0, 3.0, table=tables[1.0]) < by_a[1]


def test_two_sided_exit_rejects_bad_input(model, table0):
    with pytest.raises(DomainError):
        two_sided_exit(model, 0.0, 4.0, 3.0, table=table0)
    with pytest.raises(DomainError):
        two_sided_exit(model, 0.5, 1.0, 3.0, table=table0)


def test_write_scale_table(tmp_path, table0):
    target = write_scale_table(table0, tmp_path / "scale.csv")
    raw = target.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").split("\n")
    assert lines[0] == "# q=0"
    assert lines[1].startswith("# terms_used=")
    assert lines[3] == "x,W"
    assert lines[4] == "0,0"


@pytest.mark.slow
def test_survival_barrier(model):
    barrier = survival_barrier(model, 1e-4)
    assert barrier > 0.0
    assert survival_probability(model, barrier) >= 1.0 - 1e-4 - 1e-6
