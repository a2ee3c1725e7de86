import polars as pl
import pytest

from app import main
from src.errors import ConfigError, DomainError
from src.pipeline.executor import writer_node
from src.pipeline.graph import run, run_graph
from src.pipeline.planner import COMMAND_NODES, planner_node
from src.run_config import parse_config


def _rows(path) -> list[list[str]]:
    lines = path.read_text(encoding="utf-8").splitlines()
    return [line.split(",") for line in lines if not line.startswith("#")]


def test_graph_has_every_command_node():
    nodes = set(run_graph.get_graph().nodes)
    assert set(COMMAND_NODES) | {"planner", "writer"} <= nodes


def test_planner_routes_by_command(tmp_path):
    config = parse_config(None, {"command": "scale", "out": str(tmp_path / "s.csv")})
    assert planner_node({"config": config}) == {"route": "scale"}


def test_moments_command(tmp_path):
    out = tmp_path / "moments.csv"
    assert main(["moments", "--lambda", "1", "--n", "2", "--t", "1", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["moment", "value", "bell_value"]
    values = {row[0]: float(row[1]) for row in rows[1:]}
    assert values["mean"] == 1.0
    assert values["variance"] == 2.0
    assert values["skewness"] == pytest.approx(1.767767, abs=1e-6)


def test_pmf_from_config_file(tmp_path):
    config_file = tmp_path / "run.cfg"
    config_file.write_text("# reference\ncommand=pmf\nlambda=1\nn=2\nt=1\n", encoding="utf-8")
    out = tmp_path / "pmf.csv"
    assert main(["--config", str(config_file), "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert text.startswith("# lambda=1\n# n=2\n# t=1\n# tail_bound=")
    rows = _rows(out)
    assert rows[0] == ["k", "probability"]
    assert float(rows[1][1]) == pytest.approx(0.531464, abs=1e-6)


def test_jumps_command(tmp_path):
    out = tmp_path / "jumps.csv"
    assert main(["jumps", "--out", str(out)]) == 0
    assert "# sojourn_rate=" in out.read_text(encoding="utf-8")
    rows = _rows(out)
    assert rows[0] == ["k", "first_jump_probability"]
    assert float(rows[2][1]) == pytest.approx(0.581977, abs=1e-6)


def test_scale_and_exit_commands(tmp_path):
    scale = tmp_path / "scale.csv"
    assert main(["scale", "--h", "0.01", "--xmax", "5", "--out", str(scale)]) == 0
    assert _rows(scale)[0] == ["x", "W"]

    exit_out = tmp_path / "exit.csv"
    assert main(["exit", "--h", "0.01", "--xmax", "5", "--x", "0.5,1", "--a", "3", "--out", str(exit_out)]) == 0
    rows = _rows(exit_out)
    assert rows[0] == ["x", "a", "q", "probability"]
    assert float(rows[1][3]) < float(rows[2][3])


def test_ruin_command(tmp_path):
    out = tmp_path / "ruin.csv"
    assert main(["ruin", "--h", "0.01", "--xmax", "10", "--x", "0,1", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["x", "analytic_survival", "analytic_ruin"]
    assert float(rows[1][2]) == 1.0


def test_simulate_is_byte_reproducible(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--t", "20", "--seed", "7"]
    assert main([*args, "--out", str(first)]) == 0
    assert main([*args, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert _rows(first)[0] == ["t", "event", "surplus"]


def test_net_profit_violation_exits_with_three(tmp_path):
    out = tmp_path / "ruin.csv"
    assert main(["ruin", "--c", "0.5", "--out", str(out)]) == 3
    assert not out.exists()
    assert not (tmp_path / "ruin.csv.partial").exists()


def test_invalid_configuration_exits_with_two(tmp_path):
    assert main(["pmf", "--lambda", "-1", "--out", str(tmp_path / "p.csv")]) == 2
    assert main(["--out", str(tmp_path / "p.csv")]) == 2
    assert main(["pmf", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_unknown_flag_is_rejected():
    with pytest.raises(SystemExit) as info:
        main(["pmf", "--bogus", "1"])
    assert info.value.code == 2


def test_print_config(capsys):
    assert main(["pmf", "--lambda", "2", "--print-config"]) == 0
    lines = capsys.readouterr().out.splitlines()
    keys = [line.split("=", 1)[0] for line in lines]
    assert keys == sorted(keys)
    assert "lambda=2" in lines
    assert "command=pmf" in lines


def test_run_returns_the_exit_code(tmp_path):
    config = parse_config(None, {"command": "pmf", "out": str(tmp_path / "p.csv")})
    assert run(config) == 0


@pytest.mark.parametrize("error,code", [(ConfigError("n", "bad"), 2), (DomainError("bad"), 3)])
def test_writer_maps_errors(tmp_path, error, code):
    config = parse_config(None, {"command": "pmf", "out": str(tmp_path / "p.csv")})
    result = writer_node({"config": config, "error": error})
    assert result == {"artifact": None, "exit_code": code}
    assert not (tmp_path / "p.csv").exists()


def test_writer_fails_the_run_on_failed_checks(tmp_path):
    config = parse_config(None, {"command": "validate", "out": str(tmp_path / "v.csv")})
    frame = pl.DataFrame({"check": ["a"], "passed": [False], "value": [1.0], "threshold": [0.0]})
    state = {
        "config": config,
        "table": frame,
        "comments": {},
        "checks": [{"name": "a", "passed": False, "value": 1.0, "threshold": 0.0}],
        "error": None,
    }
    result = writer_node(state)
    assert result["exit_code"] == 3
    assert (tmp_path / "v.csv").read_text(encoding="utf-8") == "check,passed,value,threshold\na,false,1,0\n"


@pytest.mark.slow
def test_ruin_monte_carlo_is_independent_of_workers(tmp_path):
    outputs = []
    for workers in ("1", "3"):
        out = tmp_path / f"ruin_{workers}.csv"
        args = ["ruin", "--mc", "--paths", "3000", "--x", "1", "--workers", workers, "--out", str(out)]
        assert main(args) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


@pytest.mark.slow
def test_validate_reference_model(tmp_path):
    out = tmp_path / "validate.csv"
    assert main(["validate", "--c", "2", "--lambda", "1", "--delta", "1", "--sigma", "0.5", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["check", "passed", "value", "threshold"]
    assert all(row[1] == "true" for row in rows[1:])
