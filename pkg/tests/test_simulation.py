import math

import numpy as np
import pytest
from scipy.stats import norm

from src.errors import DomainError
from src.mipp.distribution import first_jump_pmf, pmf, sojourn_rate
from src.mipp.types import MippParams
from src.ruin.exits import ruin_probability, two_sided_exit
from src.ruin.model import ClaimComponent, RiskModel
from src.ruin.scale import scale_function
from src.simulation.bridge import crossing_probability, drifted_bm_ruin, segment_exit
from src.simulation.martingales import exponential_martingale, martingale_check
from src.simulation.paths import (
    Path,
    sample_first_jump,
    sample_v1,
    sample_v1_batch,
    simulate_mipp,
    sojourn_times,
)
from src.simulation.risk import (
    RiskOutcome,
    estimate_exit,
    estimate_ruin,
    path_frame,
    simulate_risk,
    write_path_dump,
)
from src.simulation.streams import StreamSeed, make_rng, path_rng


def _tv(samples: np.ndarray, masses: np.ndarray) -> float:
    counts = np.bincount(samples) / samples.size
    size = max(counts.size, masses.size)
    emp, ref = np.zeros(size), np.zeros(size)
    emp[: counts.size] = counts
    ref[: masses.size] = masses
    return 0.5 * float(np.abs(emp - ref).sum())


# ── Streams ──────────────────────────────────────────────────────────────────

def test_streams_are_pure_functions_of_their_seed(seed):
    a = path_rng(seed, 3).random(5)
    b = make_rng(StreamSeed(seed, 3)).random(5)
    c = path_rng(seed, 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_seed_validation():
    with pytest.raises(DomainError):
        StreamSeed(-1, 0)
    with pytest.raises(DomainError):
        StreamSeed(1, -1)
    with pytest.raises(DomainError):
        StreamSeed(2**64, 0)


# ── MIPP paths ───────────────────────────────────────────────────────────────

def test_sample_v1_is_reproducible(seed):
    one = [sample_v1(1.0, 3, path_rng(seed, i)) for i in range(20)]
    two = [sample_v1(1.0, 3, path_rng(seed, i)) for i in range(20)]
    assert one == two
    assert all(v >= 0 for v in one)


def test_sample_v1_rejects_bad_depth(seed):
    with pytest.raises(DomainError):
        sample_v1(1.0, 0, path_rng(seed, 0))


def test_sample_v1_batch_moments(seed):
    lam, depth, size = 0.8, 3, 20_000
    draws = sample_v1_batch(lam, depth, size, path_rng(seed, 0))
    mean = lam**depth
    variance = lam**depth * (1.0 - lam**depth) / (1.0 - lam)
    assert abs(draws.mean() - mean) < 4.0 * math.sqrt(variance / size)


def test_sample_v1_batch_matches_mass_table(seed):
    draws = sample_v1_batch(1.0, 2, 100_000, path_rng(seed, 1))
    assert _tv(draws, pmf(MippParams(lam=1.0, n=2), 1.0).masses) < 0.01


def test_simulated_path_invariants(params, seed):
    path = simulate_mipp(params, 50.0, path_rng(seed, 0))
    assert np.all(np.diff(path.jump_times) > 0.0)
    assert np.all(path.jump_sizes >= 1)
    assert path.jump_times[-1] <= 50.0
    assert path.value_at(50.0) == path.terminal_value
    assert path.value_at(0.0) == 0


def test_path_validation():
    with pytest.raises(DomainError):
        Path(jump_times=np.array([0.5, 0.2]), jump_sizes=np.array([1, 1]), t_end=1.0)
    with pytest.raises(DomainError):
        Path(jump_times=np.array([0.5]), jump_sizes=np.array([0]), t_end=1.0)


def test_terminal_value_mean(params, seed):
    n = 2000
    values = np.array([simulate_mipp(params, 1.0, path_rng(seed, i)).terminal_value for i in range(n)])
    # mean lam^n t = 1, variance n t = 2
    assert abs(values.mean() - 1.0) < 4.0 * math.sqrt(2.0 / n)


def test_sojourn_times_are_exponential(seed):
    params = MippParams(lam=1.0, n=3)
    rate = sojourn_rate(params)
    path = simulate_mipp(params, 20_000 / rate, path_rng(seed, 2))
    gaps = sojourn_times(path)
    assert np.all(gaps > 0.0)
    assert abs(gaps.mean() - 1.0 / rate) < 4.0 * (1.0 / rate) / math.sqrt(gaps.size)


def test_first_jump_law(params, seed):
    n = 20_000
    draws = [sample_first_jump(params, path_rng(seed, i)) for i in range(n)]
    times = np.array([d[0] for d in draws])
    sizes = np.array([d[1] for d in draws])
    rate = sojourn_rate(params)
    assert sizes.min() >= 1
    assert abs(times.mean() - 1.0 / rate) < 4.0 * (1.0 / rate) / math.sqrt(n)
    assert _tv(sizes, first_jump_pmf(params).masses) < 0.02


# ── Bridge ───────────────────────────────────────────────────────────────────

def test_crossing_probability():
    assert crossing_probability(1.0, 2.0, 4.0) == pytest.approx(math.exp(-1.0))
    assert crossing_probability(0.0, 2.0, 4.0) == 1.0


def test_segment_from_zero_is_ruined(seed):
    out = segment_exit(path_rng(seed, 0), 0.0, 1.0, 1.0, 1.0, None, depth=4)
    assert out is not None and out.event == "ruin"
    assert out.offset == pytest.approx(2.0**-5)


def test_quiet_segment_stays_inside(seed):
    assert segment_exit(path_rng(seed, 0), 1.0, 1.0, 1e-3, 1.0, 2.0, depth=4) is None


def test_segment_with_two_levels_reports_one_event(seed):
    events = {
        segment_exit(path_rng(seed, i), 0.5, 0.5, 1.0, 1.0, 1.0, depth=8)
        for i in range(200)
    }
    kinds = {e.event for e in events if e is not None}
    assert kinds == {"ruin", "barrier"}
    assert all(0.0 < e.offset < 1.0 for e in events if e is not None)


def test_drifted_bm_ruin():
    assert drifted_bm_ruin(0.0, 0.5, 1.0, 2.0) == pytest.approx(1.0)
    assert drifted_bm_ruin(1.0, 0.0, 1.0, 4.0) == pytest.approx(2.0 * norm.cdf(-0.5))
    assert drifted_bm_ruin(1.0, 0.5, 1.0, 2.0) < drifted_bm_ruin(1.0, 0.5, 1.0, 8.0)
    with pytest.raises(DomainError):
        drifted_bm_ruin(1.0, 0.5, 0.0, 2.0)


def test_bridge_matches_drifted_brownian_ruin(seed):
    claim_free = RiskModel.model_construct(
        c=0.5, sigma=1.0, lam=0.0, claims=(ClaimComponent(alpha=1.0, delta=1.0),)
    )
    n = 4000
    ruined = sum(simulate_risk(claim_free, 1.0, None, 2.0, path_rng(seed, i)).ruined for i in range(n))
    exact = drifted_bm_ruin(1.0, 0.5, 1.0, 2.0)
    assert abs(ruined / n - exact) < 4.0 * math.sqrt(exact * (1.0 - exact) / n)


# ── Risk process ─────────────────────────────────────────────────────────────

def test_outcome_invariants():
    with pytest.raises(DomainError):
        RiskOutcome(ruined=True, ruin_time=None, exit_level_hit=False, terminal_surplus=0.0)
    with pytest.raises(DomainError):
        RiskOutcome(ruined=True, ruin_time=1.0, exit_level_hit=True, terminal_surplus=0.0)


def test_start_above_barrier(model, seed):
    out = simulate_risk(model, 5.0, 3.0, 10.0, path_rng(seed, 0))
    assert out.exit_level_hit and out.exit_time == 0.0


def test_recorded_path(model, seed, tmp_path):
    out = simulate_risk(model, 1.0, 3.0, 50.0, path_rng(seed, 5), record=True)
    again = simulate_risk(model, 1.0, 3.0, 50.0, path_rng(seed, 5), record=True)
    assert out == again
    times = [e[0] for e in out.events]
    assert times == sorted(times)
    assert out.events[-1][1] in {"ruin", "barrier", "horizon"}
    frame = path_frame(out)
    assert frame.columns == ["t", "event", "surplus"]
    target = write_path_dump(out, tmp_path / "path.csv")
    assert target.read_text(encoding="utf-8").startswith("t,event,surplus\n")


def test_horizon_caps_the_path(model, seed):
    out = simulate_risk(model, 1000.0, None, 1e-3, path_rng(seed, 0))
    assert out.capped and not out.ruined


def test_ruin_estimation_needs_net_profit(seed):
    losing = RiskModel.single(c=0.5, sigma=0.5, lam=1.0, delta=1.0)
    with pytest.raises(DomainError, match="net-profit"):
        estimate_ruin(losing, 1.0, 100, master_seed=seed)


def test_exit_estimate_independent_of_workers(model, seed):
    one = estimate_exit(model, 1.0, 3.0, 0.1, 400, seed, workers=1, chunk_size=100)
    two = estimate_exit(model, 1.0, 3.0, 0.1, 400, seed, workers=2, chunk_size=100)
    assert one == two
    assert 0.0 <= one.value <= 1.0


def test_exit_estimate_matches_scale_function(model, coarse_grid, seed):
    table = scale_function(model, 0.0, coarse_grid)
    exact = two_sided_exit(model, 0.0, 1.0, 3.0, table=table)
    estimate = estimate_exit(model, 1.0, 3.0, 0.0, 4000, seed, workers=1)
    assert abs(estimate.value - exact) < 4.0 * estimate.stderr + 2e-3


@pytest.mark.slow
def test_ruin_estimate_matches_scale_function(model, seed):
    estimate = estimate_ruin(model, 1.0, 200_000, 1e-4, seed, workers=2)
    exact = ruin_probability(model, 1.0)
    assert estimate.capped_paths == 0
    assert abs(estimate.p_hat - exact) <= 3.0 * estimate.stderr + 1e-4


# ── Martingales ──────────────────────────────────────────────────────────────

@pytest.mark.parametrize("kind,target", [("linear", 0.0), ("quadratic", 0.0), ("exponential", 1.0)])
def test_martingales_have_their_mean(params, seed, kind, target):
    mean, stderr = martingale_check(kind, params, 1.0, 4000, seed)
    assert abs(mean - target) < 4.0 * stderr


def test_general_exponential_martingale(params, seed):
    mean, stderr = martingale_check("exponential", params, 1.0, 4000, seed, beta=-0.3, alpha=0.4)
    assert abs(mean - 1.0) < 4.0 * stderr


def test_exponential_martingale_on_a_flat_path():
    flat = Path(jump_times=np.array([]), jump_sizes=np.array([], dtype=np.int64), t_end=1.0)
    expected = math.exp(0.5) - 0.7 * (math.exp(0.5) - 1.0) / 0.5
    assert exponential_martingale(flat, 0.5, -0.5, 0.2) == pytest.approx(expected)


def test_martingale_check_validation(params):
    with pytest.raises(DomainError):
        martingale_check("cubic", params, 1.0, 10)
    with pytest.raises(DomainError):
        martingale_check("linear", params, 1.0, 1)
