"""
src/pipeline/validation.py
The validation suite: every named invariant of the distribution,
simulation and scale-function modules, measured and compared with its
threshold. Reference parameters are fixed; seeds, path counts, grid and
tolerances come from the RunConfig.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np
import polars as pl
from loguru import logger
from rich.console import Console
from rich.table import Table

from src.config import get_settings
from src.errors import MippError
from src.mipp.distribution import (
    char_exponent,
    exponent_consistency,
    first_jump_pmf,
    governing_residual,
    joint_mgf_first_jump,
    levy_measure,
    pmf,
    q_sequence,
    sojourn_rate,
    tilted_exponent,
)
from src.mipp.moments import (
    moment_bell,
    moments_closed,
    pmf_moments,
    raw_moments,
    skew_kurt_limits,
)
from src.mipp.types import MippParams
from src.ruin.exits import laplace_identity_residual, ruin_probability, two_sided_exit
from src.ruin.model import ClaimComponent, RiskModel, phi_q, psi_R
from src.ruin.scale import Grid, ScaleTable, component_kernel, kernel_tables, scale_function
from src.run_config import RunConfig
from src.simulation.bridge import drifted_bm_ruin
from src.simulation.martingales import martingale_check
from src.simulation.paths import (
    sample_first_jump,
    sample_v1_batch,
    simulate_mipp,
    sojourn_times,
)
from src.simulation.risk import estimate_exit, estimate_ruin, simulate_risk
from src.simulation.streams import path_rng
from src.utils.convolution import trapezoid_convolve

_REF = MippParams(lam=1.0, n=2)
_MGF_POINTS = (-1.0, -0.5, 0.0)
# tables whose tails are weighted by k^4 or e^{k theta} need a finer cut
_FINE_EPS = 1e-15
_SIGMA_LADDER = (0.2, 0.1, 0.05)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    threshold: float


# (measured value, threshold); a check passes when value <= threshold
Measured = tuple[float, float]
NamedCheck = tuple[str, Callable[[], Measured]]


def _z(diff: float, stderr: float) -> float:
    if stderr == 0.0:
        return 0.0 if abs(diff) < 1e-12 else math.inf
    return abs(diff) / stderr


def _tv(samples: np.ndarray, masses: np.ndarray) -> float:
    """Total-variation distance between an integer sample and a mass table."""
    counts = np.bincount(samples.astype(np.int64)) / samples.size
    size = max(counts.size, masses.size)
    emp = np.zeros(size)
    ref = np.zeros(size)
    emp[: counts.size] = counts
    ref[: masses.size] = masses
    return 0.5 * float(np.abs(emp - ref).sum())


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# ── Distribution ─────────────────────────────────────────────────────────────

def distribution_checks(config: RunConfig) -> Iterator[NamedCheck]:
    eps = config.eps
    grid = [
        (MippParams(lam=lam, n=n), t)
        for n in (1, 2, 3, 4)
        for lam in (0.5, 1.0, 2.0)
        for t in (0.5, 1.0, 2.0)
    ]
    tables: dict[tuple[float, int, float], object] = {}

    def table(params: MippParams, t: float):
        key = (params.lam, params.n, t)
        if key not in tables:
            tables[key] = pmf(params, t, eps)
        return tables[key]

    def normalization() -> Measured:
        worst = max(abs(table(p, t).total + table(p, t).tail_bound - 1.0) for p, t in grid)
        return worst, 1e-12

    def mean_identity() -> Measured:
        worst = max(_rel(pmf_moments(table(p, t)).mean, p.lam**p.n * t) for p, t in grid)
        return worst, 1e-6

    def variance_identity() -> Measured:
        worst = max(
            _rel(pmf_moments(table(p, t)).variance, moments_closed(p, t).variance) for p, t in grid
        )
        return worst, 1e-6

    def zero_state() -> Measured:
        worst = 0.0
        for lam in (0.5, 1.0, 2.0):
            q = q_sequence(lam, 4)
            for m in range(1, 5):
                zero = pmf(MippParams(lam=lam, n=m), 1.0, eps).at(0)
                worst = max(worst, abs(zero - (1.0 - q[m])))
        return worst, 1e-10

    def branch_continuity() -> Measured:
        centre = moments_closed(_REF, 1.0)
        worst = 0.0
        for lam in (1.0 - 1e-5, 1.0 + 1e-5):
            near = moments_closed(MippParams(lam=lam, n=2), 1.0)
            for a, b in zip(
                (near.mean, near.variance, near.skewness, near.kurtosis),
                (centre.mean, centre.variance, centre.skewness, centre.kurtosis),
            ):
                worst = max(worst, _rel(a, b))
        return worst, 1e-3

    def bell_consistency() -> Measured:
        params = MippParams(lam=0.5, n=2)
        raw = raw_moments(moments_closed(params, 1.0))
        worst = max(_rel(moment_bell(params, 1.0, m, _FINE_EPS), raw[m - 1]) for m in range(1, 5))
        return worst, 1e-8

    def tilt_identity() -> Measured:
        # the tilted exponent rebuilt atom by atom from nu^theta; the
        # e^{k (theta + z)} weight needs a much deeper cut than _FINE_EPS
        worst = 0.0
        for theta in (-1.0, -0.5, 0.5):
            atoms = levy_measure(_REF, theta, 60, 1e-30)
            k = np.array([a.k for a in atoms], dtype=float)
            mass = np.array([a.mass for a in atoms])
            for z in (-0.3, 0.2):
                expected = char_exponent(_REF, z + theta) - char_exponent(_REF, theta)
                from_measure = float(np.dot(mass, np.expm1(k * z)))
                worst = max(
                    worst,
                    abs(from_measure - expected),
                    abs(tilted_exponent(_REF, theta, z) - from_measure),
                )
        return worst, 1e-12

    def levy_tilt() -> Measured:
        base = levy_measure(_REF, 0.0, 30, _FINE_EPS)
        worst = 0.0
        for theta in (-0.5, 0.5):
            tilted = levy_measure(_REF, theta, 30, _FINE_EPS)
            for atom, ref in zip(tilted, base):
                if ref.mass > 0.0:
                    worst = max(worst, _rel(atom.mass, math.exp(atom.k * theta) * ref.mass))
        return worst, 1e-12

    def levy_jump_rate() -> Measured:
        jumps = sum(atom.mass for atom in levy_measure(_REF, 0.0, 40, _FINE_EPS) if atom.is_jump)
        return _rel(jumps, sojourn_rate(_REF)), 1e-9

    def exponent() -> Measured:
        worst = max(exponent_consistency(_REF, 1.0, theta, eps) for theta in (-0.25, -1.0, -3.0))
        return worst, 1e-8

    def mgf_marginal() -> Measured:
        rate = sojourn_rate(_REF)
        worst = max(
            abs(joint_mgf_first_jump(_REF, s1, 0.0) - rate / (rate - s1)) for s1 in _MGF_POINTS
        )
        return worst, 1e-14

    def governing() -> Measured:
        worst = max(governing_residual(_REF, 1.0, k, 1e-4) for k in range(config.k + 1))
        return worst, 1e-3

    def governing_order() -> Measured:
        fine = sum(governing_residual(_REF, 1.0, k, 1e-4) for k in range(config.k + 1))
        coarse = sum(governing_residual(_REF, 1.0, k, 2e-4) for k in range(config.k + 1))
        # O(dt^2) means a ratio of 4; a factor 2 either way is tolerated
        return abs(math.log2(coarse / fine) - 2.0), 1.0

    def limits() -> Measured:
        skew, kurt = skew_kurt_limits(2.0, 1.0)
        finite = moments_closed(MippParams(lam=2.0, n=40), 1.0)
        worst = max(_rel(finite.skewness, skew), _rel(finite.kurtosis, kurt))
        return worst, 1e-6

    yield from (
        ("pmf_normalization", normalization),
        ("pmf_mean_identity", mean_identity),
        ("pmf_variance_identity", variance_identity),
        ("zero_state_identity", zero_state),
        ("branch_continuity", branch_continuity),
        ("bell_consistency", bell_consistency),
        ("tilt_identity", tilt_identity),
        ("levy_tilt_identity", levy_tilt),
        ("levy_jump_rate", levy_jump_rate),
        ("exponent_consistency", exponent),
        ("mgf_marginal", mgf_marginal),
        ("governing_residual", governing),
        ("governing_residual_order", governing_order),
        ("skew_kurt_limits", limits),
    )


# ── Simulation ───────────────────────────────────────────────────────────────

def simulation_checks(config: RunConfig) -> Iterator[NamedCheck]:
    seed, size = config.seed, config.paths
    model = config.risk_model()
    first_jumps: list[np.ndarray] = []

    def jumps() -> tuple[np.ndarray, np.ndarray]:
        if not first_jumps:
            draws = [sample_first_jump(_REF, path_rng(seed, i)) for i in range(size)]
            first_jumps.extend([np.array([d[0] for d in draws]), np.array([d[1] for d in draws])])
        return first_jumps[0], first_jumps[1]

    def determinism() -> Measured:
        one = simulate_risk(model, 1.0, 3.0, 50.0, path_rng(seed, 7), record=True)
        two = simulate_risk(model, 1.0, 3.0, 50.0, path_rng(seed, 7), record=True)
        same_risk = one == two and one.events == two.events
        p1 = simulate_mipp(_REF, 5.0, path_rng(seed, 7))
        p2 = simulate_mipp(_REF, 5.0, path_rng(seed, 7))
        same_path = np.array_equal(p1.jump_times, p2.jump_times) and np.array_equal(
            p1.jump_sizes, p2.jump_sizes
        )
        # the worker count must not change the reduction
        small = max(min(size, 2000), 2)
        chunk = max(small // 4, 1)
        a = estimate_exit(model, 1.0, 3.0, 0.0, small, seed, workers=1, chunk_size=chunk)
        b = estimate_exit(model, 1.0, 3.0, 0.0, small, seed, workers=2, chunk_size=chunk)
        mismatches = int(not same_risk) + int(not same_path) + int(a != b)
        return mismatches, 0

    def distribution_match() -> Measured:
        worst = 0.0
        stream = 0
        for lam in (0.5, 1.0):
            for n in (1, 2, 3):
                draws = sample_v1_batch(lam, n, size, path_rng(seed, stream))
                stream += 1
                worst = max(worst, _tv(draws, pmf(MippParams(lam=lam, n=n), 1.0, config.eps).masses))
        return worst, 0.01

    params3 = MippParams(lam=1.0, n=3)
    rate3 = sojourn_rate(params3)
    sojourns: list[np.ndarray] = []

    def sojourn_sample() -> np.ndarray:
        if not sojourns:
            path = simulate_mipp(params3, size / rate3, path_rng(seed, 0))
            sojourns.append(sojourn_times(path))
        return sojourns[0]

    def sojourn_mean() -> Measured:
        s = sojourn_sample()
        return _z(s.mean() - 1.0 / rate3, (1.0 / rate3) / math.sqrt(s.size)), 4.0

    def sojourn_variance() -> Measured:
        s = sojourn_sample()
        # Var of the sample variance of Exp(r) is about 8 / (N r^4)
        stderr = math.sqrt(8.0 / s.size) / rate3**2
        return _z(s.var(ddof=1) - 1.0 / rate3**2, stderr), 4.0

    def first_jump_size() -> Measured:
        _, sizes = jumps()
        return _tv(sizes, first_jump_pmf(_REF, config.eps).masses), 0.01

    def joint_mgf() -> Measured:
        times, sizes = jumps()
        worst = 0.0
        for s1 in _MGF_POINTS:
            for s2 in _MGF_POINTS:
                values = np.exp(s1 * times + s2 * sizes)
                stderr = float(values.std(ddof=1)) / math.sqrt(values.size)
                exact = joint_mgf_first_jump(_REF, s1, s2)
                worst = max(worst, _z(float(values.mean()) - exact, stderr))
        return worst, 4.0

    def martingale(kind: str, target: float) -> Callable[[], Measured]:
        def run() -> Measured:
            mean, stderr = martingale_check(kind, _REF, 1.0, size, seed)
            return _z(mean - target, stderr), 4.0

        return run

    def lln() -> Measured:
        horizon = 1e4
        path = simulate_mipp(_REF, horizon, path_rng(seed, 0))
        return abs(path.terminal_value / horizon - 1.0), 4.0 * math.sqrt(2.0 / horizon)

    def bridge() -> Measured:
        drift, sigma, x, horizon = 0.5, 1.0, 1.0, 2.0
        claim_free = RiskModel.model_construct(
            c=drift, sigma=sigma, lam=0.0, claims=(ClaimComponent(alpha=1.0, delta=1.0),)
        )
        ruined = sum(
            simulate_risk(claim_free, x, None, horizon, path_rng(seed, i)).ruined for i in range(size)
        )
        p_hat = ruined / size
        exact = drifted_bm_ruin(x, drift, sigma, horizon)
        stderr = math.sqrt(exact * (1.0 - exact) / size)
        return _z(p_hat - exact, stderr), 3.0

    yield from (
        ("determinism", determinism),
        ("distribution_match_tv", distribution_match),
        ("sojourn_mean", sojourn_mean),
        ("sojourn_variance", sojourn_variance),
        ("first_jump_tv", first_jump_size),
        ("joint_mgf_mc", joint_mgf),
        ("martingale_linear", martingale("linear", 0.0)),
        ("martingale_quadratic", martingale("quadratic", 0.0)),
        ("martingale_exponential", martingale("exponential", 1.0)),
        ("lln", lln),
        ("bridge_correctness", bridge),
    )


# ── Scale function ───────────────────────────────────────────────────────────

def scale_checks(config: RunConfig, ruin_paths: int | None = None) -> Iterator[NamedCheck]:
    """ruin_paths floors the path count of the analytic-vs-Monte-Carlo ruin check."""
    seed, size = config.seed, config.paths
    if ruin_paths is None:
        ruin_paths = get_settings().simulation.validation_ruin_paths
    model = config.risk_model()
    grid = config.grid()
    offsets = config.theta or (1.0, 2.0, 4.0)
    tables: dict[tuple[str, float], ScaleTable] = {}

    def table(q: float) -> ScaleTable:
        if ("ref", q) not in tables:
            tables[("ref", q)] = scale_function(model, q, grid, config.tol)
        return tables[("ref", q)]

    def monotone() -> Measured:
        worst = max(float(np.max(-np.diff(table(q).values), initial=0.0)) for q in (0.0, 0.1))
        return worst, 1e-10

    def boundary() -> Measured:
        expected = 0.0 if model.sigma > 0.0 else 1.0 / model.c
        return abs(table(0.0).values[0] - expected), 1e-15

    def laplace() -> Measured:
        worst = 0.0
        for q in (0.0, 0.1):
            phi = phi_q(model, q)
            for off in offsets:
                worst = max(worst, laplace_identity_residual(model, q, phi + off, table=table(q)))
        return worst, 5e-3

    def sigma_limit() -> Measured:
        short = Grid.covering(config.h, 3.0)
        mask = short.x >= 0.2 - 1e-12
        base = model.model_copy(update={"sigma": 0.0})
        w_hat = scale_function(base, 0.0, short, config.tol).values
        distances = []
        for sigma in _SIGMA_LADDER:
            w = scale_function(model.model_copy(update={"sigma": sigma}), 0.0, short, config.tol).values
            distances.append(float(np.max(np.abs(w - w_hat)[mask])))
        logger.info(f"[Validation] sigma->0 distances {distances}")
        increases = sum(1 for a, b in zip(distances, distances[1:]) if not b < a)
        return increases, 0

    def sigma_origin() -> Measured:
        base = model.model_copy(update={"sigma": 0.0})
        w0 = scale_function(base, 0.0, Grid.covering(config.h, 1.0), config.tol).values[0]
        return abs(w0 - 1.0 / base.c), 1e-15

    def exit_monotone() -> Measured:
        short = Grid.covering(config.h, 4.0)
        exit_tables = {q: scale_function(model, q, short, config.tol) for q in (0.0, 0.1, 1.0)}
        violations = 0
        for q, tab in exit_tables.items():
            xs = [two_sided_exit(model, q, x, 3.0, table=tab) for x in np.linspace(0.0, 3.0, 31)]
            violations += sum(1 for a, b in zip(xs, xs[1:]) if b < a - 1e-12)
            by_a = [two_sided_exit(model, q, 1.0, a, table=tab) for a in (2.0, 3.0, 4.0)]
            violations += sum(1 for a, b in zip(by_a, by_a[1:]) if b > a + 1e-12)
        by_q = [two_sided_exit(model, q, 1.0, 3.0, table=exit_tables[q]) for q in (0.0, 0.1, 1.0)]
        violations += sum(1 for a, b in zip(by_q, by_q[1:]) if b > a + 1e-12)
        return violations, 0

    def roots() -> Measured:
        worst = max(abs(psi_R(model, phi_q(model, q)) - q) for q in (0.0, 0.1, 1.0))
        return worst, 1e-10

    mixture = RiskModel(
        c=2.0, sigma=0.5, lam=1.0,
        claims=(ClaimComponent(alpha=0.5, delta=1.0), ClaimComponent(alpha=0.5, delta=2.0)),
    )

    def mixture_degenerate() -> Measured:
        single = RiskModel(
            c=model.c, sigma=model.sigma, lam=model.lam,
            claims=(ClaimComponent(alpha=1.0, delta=model.claims[0].delta),),
        )
        reference = RiskModel.single(model.c, model.sigma, model.lam, model.claims[0].delta)
        short = Grid.covering(config.h, 5.0)
        gap = np.max(np.abs(
            scale_function(single, 0.0, short, config.tol).values
            - scale_function(reference, 0.0, short, config.tol).values
        ))
        return float(gap), 1e-12

    def mixture_laplace() -> Measured:
        phi = phi_q(mixture, 0.0)
        return laplace_identity_residual(mixture, 0.0, phi + 2.0, grid, config.tol), 5e-3

    def mixture_kernel() -> Measured:
        x = grid.x
        g1 = component_kernel(x, mixture.lam * 0.5 * 1.0, 1.0)
        g2 = component_kernel(x, mixture.lam * 0.5 * 2.0, 2.0)
        explicit = g1 + g2 + trapezoid_convolve(g1, g2, grid.h)
        built = kernel_tables(mixture, 0.0, grid).g_values
        return float(np.max(np.abs(built - explicit))), 1e-12

    def ruin_mc() -> Measured:
        worst = -math.inf
        paths = max(size, ruin_paths)
        for x in (0.5, 1.0, 2.0):
            estimate = estimate_ruin(model, x, paths, config.barrier_eps, seed, workers=config.workers)
            analytic = ruin_probability(model, x, table=table(0.0))
            worst = max(worst, abs(estimate.p_hat - analytic) - 3.0 * estimate.stderr)
        return worst, 1e-4

    def ruin_at_zero() -> Measured:
        estimate = estimate_ruin(model, 0.0, min(size, 1000), config.barrier_eps, seed, workers=config.workers)
        return 1.0 - estimate.p_hat, 0.0 if model.sigma > 0.0 else 1.0

    def exit_mc() -> Measured:
        estimate = estimate_exit(model, 1.0, 3.0, 0.0, size, seed, workers=config.workers)
        exact = two_sided_exit(model, 0.0, 1.0, 3.0, table=table(0.0))
        return _z(estimate.value - exact, estimate.stderr), 3.0

    yield from (
        ("scale_monotonicity", monotone),
        ("scale_boundary", boundary),
        ("laplace_identity", laplace),
        ("sigma_zero_consistency", sigma_limit),
        ("sigma_zero_origin", sigma_origin),
        ("exit_monotonicity", exit_monotone),
        ("root_certification", roots),
        ("mixture_degeneracy", mixture_degenerate),
        ("mixture_laplace_identity", mixture_laplace),
        ("mixture_kernel", mixture_kernel),
        ("ruin_mc_agreement", ruin_mc),
        ("ruin_at_zero", ruin_at_zero),
        ("two_sided_exit_mc", exit_mc),
    )


# ── Suite ────────────────────────────────────────────────────────────────────

def run_validation(config: RunConfig) -> list[Check]:
    checks: list[Check] = []
    for group in (distribution_checks, scale_checks, simulation_checks):
        for name, measure in group(config):
            try:
                value, threshold = measure()
                result = Check(name, bool(value <= threshold), float(value), float(threshold))
            except MippError as exc:
                logger.error(f"[Validation] {name} raised {exc}")
                result = Check(name, False, math.nan, math.nan)
            level = "SUCCESS" if result.passed else "WARNING"
            logger.log(level, f"[Validation] {result.name}: value={result.value:.3e} threshold={result.threshold:.1e}")
            checks.append(result)
    return checks


def checks_frame(checks: list[Check]) -> pl.DataFrame:
    return pl.DataFrame(
        {
            "check": [c.name for c in checks],
            "passed": [c.passed for c in checks],
            "value": [c.value for c in checks],
            "threshold": [c.threshold for c in checks],
        },
        schema={"check": pl.Utf8, "passed": pl.Boolean, "value": pl.Float64, "threshold": pl.Float64},
    )


def render_checks(checks: list[Check], console: Console | None = None) -> None:
    console = console or Console(stderr=True)
    table = Table(title="Validation")
    table.add_column("check")
    table.add_column("passed", justify="center")
    table.add_column("value", justify="right")
    table.add_column("threshold", justify="right")
    for c in checks:
        mark = "[green]pass[/green]" if c.passed else "[red]FAIL[/red]"
        table.add_row(c.name, mark, f"{c.value:.3e}", f"{c.threshold:.1e}")
    console.print(table)
