import io
import math

import pytest
from rich.console import Console

from src.pipeline import validation
from src.pipeline.validation import (
    Check,
    checks_frame,
    distribution_checks,
    render_checks,
    scale_checks,
    simulation_checks,
)
from src.run_config import parse_config
from src.simulation.risk import RuinEstimate

CONFIG = parse_config(None, {"command": "validate"})
DISTRIBUTION = dict(distribution_checks(CONFIG))

# small enough to run every Monte Carlo check in seconds
SMALL = parse_config(None, {"command": "validate", "paths": 300, "h": 0.01, "seed": 7})


@pytest.mark.parametrize("name", sorted(DISTRIBUTION))
def test_distribution_invariants_hold(name):
    value, threshold = DISTRIBUTION[name]()
    assert value <= threshold, f"{name}: {value} > {threshold}"


def test_every_invariant_is_named_once():
    assert len(DISTRIBUTION) == 14
    assert len(dict(scale_checks(SMALL, ruin_paths=300))) == 13
    assert len(dict(simulation_checks(SMALL))) == 11


@pytest.mark.parametrize(
    "group",
    [lambda cfg: scale_checks(cfg, ruin_paths=300), simulation_checks],
    ids=["scale", "simulation"],
)
def test_every_check_measures_something(group):
    for name, measure in group(SMALL):
        value, threshold = measure()
        assert not math.isnan(value), name
        assert not math.isnan(threshold), name


def test_ruin_agreement_uses_the_path_floor(monkeypatch):
    requested = []

    def fake_estimate(model, x, n_paths, *args, **kwargs):
        requested.append(n_paths)
        return RuinEstimate(p_hat=0.5, stderr=0.01, n_paths=n_paths, tail_bias_bound=0.0, barrier=10.0)

    monkeypatch.setattr(validation, "estimate_ruin", fake_estimate)
    monkeypatch.setattr(validation, "ruin_probability", lambda *args, **kwargs: 0.5)
    ruin_mc = dict(scale_checks(SMALL, ruin_paths=200_000))["ruin_mc_agreement"]
    value, threshold = ruin_mc()
    assert requested == [200_000, 200_000, 200_000]
    assert value <= threshold


def test_ruin_path_floor_comes_from_settings():
    assert validation.get_settings().simulation.validation_ruin_paths == 200_000


def test_checks_frame_and_report():
    checks = [Check("a", True, 0.5, 1.0), Check("b", False, math.nan, math.nan)]
    frame = checks_frame(checks)
    assert frame.columns == ["check", "passed", "value", "threshold"]
    assert frame["passed"].to_list() == [True, False]

    buffer = io.StringIO()
    render_checks(checks, Console(file=buffer, width=120))
    report = buffer.getvalue()
    assert "FAIL" in report and "pass" in report
