"""Command-line entry point: one subcommand per toolkit module."""

import itertools
import os
import sys
import time
from collections.abc import Callable
from dataclasses import dataclass, replace
from pathlib import Path

import click
import numpy as np
from loguru import logger
from scipy import stats
from scipy.integrate import cumulative_trapezoid, trapezoid

from .. import __version__
from ..bounds import (
    BirthDeathSpec,
    EventKind,
    HittingScenario,
    birth_death_first_events_mc,
    choose_small_set_points,
    exp_moment_check,
    hitting_lower_bound,
    inv_substrate_moment_bound,
    p_birth,
    p_birth_exact,
    p_death,
    p_death_exact,
    restrict_small_set,
    small_set_constant,
    small_set_mc_check,
)
from ..common.errors import ChemostatError, ConfigurationError, NumericError
from ..common.logging import run_context, setup_logging
from ..common.rng import RngStream, derive_seed
from ..flow import (
    EquilibriumTable,
    FlowSegment,
    FlowSolverConfig,
    flow_table,
    initial_for,
    time_to_reach,
)
from ..lyapunov import (
    DriftGrid,
    blf2_sandwich,
    g_drift_check,
    select_g_constants,
    select_parameters,
    verify_drift,
)
from ..model import ChemostatParams, HybridState, LinearLaw, validate
from ..qsd import (
    ParticleEnsemble,
    estimate_h,
    estimate_lambda_survival,
    estimate_qsd_naive,
    evolve_fleming_viot,
    qsd_fixed_point_check,
    total_variation,
    tv_noise_floor,
    yaglom_distance,
)
from ..simulate import (
    THREADS_ENV,
    JumpKind,
    default_rate_bound,
    dynkin_residual_psi,
    first_event_survival,
    resolve_threads,
    run_replicas,
    simulate_path,
    step,
)
from ..validation import (
    CheckReport,
    CheckResult,
    ExponentialKSCheck,
    MeanBoundCheck,
    ProportionCheck,
    ToleranceCheck,
)
from ..validation.base import utc_timestamp
from .config import RunConfig, parse_config
from .manifest import RunManifest, find_manifests
from .outputs import RunOutputs

# Seed phases of a run; each estimator draws from its own derived seed.
PHASE_PATHS = 1
PHASE_FIRST_EVENT = 2
PHASE_QSD_NAIVE = 10
PHASE_LAMBDA = 11
PHASE_H = 12
PHASE_FIXED_POINT = 13
PHASE_FLEMING_VIOT = 14
PHASE_TV = 15
PHASE_YAGLOM = 16
PHASE_BIRTH_DEATH = 20
PHASE_SMALL_SET = 21
PHASE_HITTING = 22
PHASE_INV_MOMENT = 23
PHASE_EXP_MOMENT = 24

QSD_TV_TOLERANCE = 0.05


@dataclass
class RunState:
    """Global options after config loading and overrides."""

    config: RunConfig | None
    out: Path
    threads: int

    def require_config(self, subcommand: str) -> RunConfig:
        if self.config is None:
            raise ConfigurationError(f"{subcommand} needs --config")
        return self.config


def _resolve_threads(requested: int | None, config: RunConfig | None) -> int:
    """--threads, then CHEMOSTAT_QSD_THREADS, then the file, then the CPU count."""
    from_env = os.environ.get(THREADS_ENV)
    if requested is None and not from_env and config and config.threads:
        return config.threads
    return resolve_threads(requested)


def _certificate(name: str, passed: bool, metrics: dict, started: float) -> CheckResult:
    return CheckResult(
        check_name=name,
        passed=bool(passed),
        metrics=metrics,
        duration_seconds=time.perf_counter() - started,
    )


def _execute(
    state: RunState,
    subcommand: str,
    body: Callable[[RunState, RunOutputs], list[CheckResult]],
    config_echo: dict | None = None,
) -> None:
    """Run a subcommand body, then write its manifest."""
    started_at = utc_timestamp()
    start = time.perf_counter()
    outputs = RunOutputs(state.out / subcommand)
    seed = state.config.seed if state.config else None
    with run_context(subcommand, seed):
        logger.info(f"Writing to {outputs.run_dir} with {state.threads} workers")
        checks = body(state, outputs)

    if config_echo is None:
        config_echo = state.config.to_dict() if state.config else {}
    manifest = RunManifest.for_outputs(
        subcommand=subcommand,
        config=config_echo,
        run_dir=outputs.run_dir,
        files=outputs.files,
        started_at=started_at,
        wall_clock_seconds=time.perf_counter() - start,
        checks=[check.to_dict() for check in checks],
    )
    manifest.write(outputs.run_dir)

    failed = [check.check_name for check in checks if not check.passed]
    for name in failed:
        logger.warning(f"Check failed: {name}")
    status = f"{len(checks) - len(failed)}/{len(checks)} checks passed"
    if not checks:
        status = "no checks"
    click.echo(
        f"{subcommand}: {len(outputs.files)} outputs in {outputs.run_dir} ({status})"
    )


# --------------------------------------------------------------------------- flow


def _flow_body(state: RunState, outputs: RunOutputs) -> list[CheckResult]:
    config = state.require_config("flow")
    params, solver, block = config.model, config.solver, config.flow
    report = validate(params)
    outputs.write_json("validation.json", report.to_dict())
    if not report.passed:
        logger.warning(f"Parameter assumptions fail: {report.issues}")

    table = EquilibriumTable.build(params, block.equilibria_max, solver.root_tol)
    outputs.write_csv("equilibria.csv", table.to_rows())

    times = np.linspace(0.0, block.horizon, block.points)
    curves = [
        row
        for ell in block.ells
        for s0 in block.s0_values
        for row in flow_table(params, ell, s0, times, solver)
    ]
    outputs.write_csv("flow_curves.csv", curves)

    rows, whole, parts, starts, recovered = [], [], [], [], []
    for ell in block.ells:
        s_bar = table[ell]
        for s0 in block.s0_values:
            if s0 == s_bar:
                continue
            s1, s2 = s0 + (s_bar - s0) / 3, s0 + 2 * (s_bar - s0) / 3
            t01 = time_to_reach(params, ell, s0, s1, solver)
            t12 = time_to_reach(params, ell, s1, s2, solver)
            t02 = time_to_reach(params, ell, s0, s2, solver)
            back = initial_for(params, ell, s2, t02, solver)
            whole.append(t02)
            parts.append(t01 + t12)
            starts.append(s0)
            recovered.append(back)
            rows.append(
                {"ell": ell, "s0": s0, "s": s2, "phi_tilde": t02, "phi_minus_s": back}
            )
    outputs.write_csv("inverse_times.csv", rows)

    checks = [
        ToleranceCheck("phi-tilde additivity", 10 * solver.root_tol).check(
            whole, parts
        ),
        ToleranceCheck("phi-minus-s inverts the flow", 1e-8).check(recovered, starts),
    ]
    if isinstance(params.growth, LinearLaw):
        ells = sorted(table.values)
        closed = [
            params.D * params.s_in / (params.D + params.k * params.growth.c * ell)
            for ell in ells
        ]
        checks.append(
            ToleranceCheck("linear equilibria closed form", 1e-8).check(
                [table[ell] for ell in ells], closed
            )
        )
    return checks


# ----------------------------------------------------------------------- simulate


@dataclass(frozen=True)
class _PathTask:
    params: ChemostatParams
    x0: int
    s0: float
    horizon: float
    check_times: tuple[float, ...]
    keep: int

    def __call__(self, index: int, rng: np.random.Generator):
        trajectory = simulate_path(self.params, self.x0, self.s0, self.horizon, rng)
        trajectory.check_invariants()
        rows = trajectory.to_rows() if index < self.keep else []
        counts = [trajectory.x_at(t) for t in self.check_times]
        residual = dynkin_residual_psi(self.params, trajectory, self.horizon)
        return rows, counts, residual, trajectory.extinct_at, len(trajectory.events)


@dataclass(frozen=True)
class _FirstEventTask:
    params: ChemostatParams
    x0: int
    s0: float

    def __call__(self, index: int, rng: np.random.Generator) -> tuple[float, bool]:
        result = step(
            self.params,
            HybridState(self.x0, self.s0),
            default_rate_bound(self.params, self.s0),
            rng,
        )
        return result.elapsed, result.event.kind is JumpKind.DIVISION


def _first_event_law(
    params: ChemostatParams,
    x: int,
    s: float,
    solver: FlowSolverConfig,
    points: int = 4001,
):
    """CDF of T₁ and the probability that the first jump is a division."""
    t_max = 30.0 / (params.D * x)
    grid = np.linspace(0.0, t_max, points)
    segment = FlowSegment(params, x, s, solver, horizon=t_max)
    mu = np.array([float(params.growth.eval(segment(float(u)))) for u in grid])
    survival = np.exp(-cumulative_trapezoid(x * (mu + params.D), grid, initial=0.0))
    p_division = float(trapezoid(x * mu * survival, grid))

    def cdf(values):
        return 1.0 - np.interp(values, grid, survival, right=0.0)

    return cdf, p_division


def _simulate_body(state: RunState, outputs: RunOutputs) -> list[CheckResult]:
    config = state.require_config("simulate")
    seed = config.require_seed("simulate")
    params, block, n = config.model, config.simulate, config.replicas

    results = run_replicas(
        _PathTask(
            params,
            block.x0,
            block.s0,
            block.horizon,
            tuple(block.check_times),
            block.save_paths,
        ),
        n,
        derive_seed(seed, PHASE_PATHS),
        threads=state.threads,
        desc="trajectories",
    )
    rows = [
        {"path": index, **row}
        for index, (path_rows, *_) in enumerate(results)
        for row in path_rows
    ]
    outputs.write_csv("trajectories.csv", rows)

    counts = np.array([r[1] for r in results], dtype=float)
    residuals = np.array([r[2] for r in results])
    extinct = np.array([r[3] is not None for r in results])
    events = np.array([r[4] for r in results])

    first = run_replicas(
        _FirstEventTask(params, block.x0, block.s0),
        n,
        derive_seed(seed, PHASE_FIRST_EVENT),
        threads=state.threads,
        desc="first events",
    )
    first_times = np.array([t for t, _ in first])
    divisions = np.array([d for _, d in first], dtype=float)
    cdf, p_division = _first_event_law(params, block.x0, block.s0, config.solver)

    outputs.write_json(
        "summary.json",
        {
            "paths": n,
            "start": [block.x0, block.s0],
            "horizon": block.horizon,
            "extinct_fraction": float(extinct.mean()),
            "mean_events": float(events.mean()),
            "mean_x": {
                str(t): float(counts[:, k].mean())
                for k, t in enumerate(block.check_times)
            },
            "first_event_mean": float(first_times.mean()),
            "division_fraction": float(divisions.mean()),
            "division_probability": p_division,
        },
    )

    checks = [
        ProportionCheck(f"P(T1 > {delta})").check(
            first_times > delta,
            first_event_survival(params, block.x0, block.s0, delta, config.solver),
        )
        for delta in block.first_event_deltas
    ]
    checks.append(
        ProportionCheck("first jump is a division").check(divisions, p_division)
    )
    checks.append(ExponentialKSCheck("first event time law").check(first_times, cdf))
    checks.append(
        MeanBoundCheck("Dynkin residual mean <= 0", upper=True).check(residuals, 0.0)
    )
    checks.append(
        MeanBoundCheck("Dynkin residual mean >= 0", upper=False).check(residuals, 0.0)
    )
    if 0 < block.s0 < EquilibriumTable(params)[1]:
        for k, t in enumerate(block.check_times):
            low, high = blf2_sandwich(params, block.x0, t)
            checks.append(
                MeanBoundCheck(f"E[X_{t}] upper envelope", upper=True).check(
                    counts[:, k], high
                )
            )
            checks.append(
                MeanBoundCheck(f"E[X_{t}] lower envelope", upper=False).check(
                    counts[:, k], low
                )
            )
    return checks


# ----------------------------------------------------------------------- lyapunov


def _lyapunov_body(state: RunState, outputs: RunOutputs) -> list[CheckResult]:
    config = state.require_config("verify-lyapunov")
    params, block = config.model, config.lyapunov
    started = time.perf_counter()

    report = validate(params)
    if not report.passed:
        raise ConfigurationError("model fails its assumptions", issues=report.issues)
    p = block.p if block.p is not None else block.p_fraction * report.p_max
    grid = DriftGrid(x_max=block.x_max, s_points=block.s_points)

    constants = select_parameters(params, block.rho, p, grid)
    overrides = {
        key: value
        for key, value in (
            ("theta", block.theta),
            ("eta", block.eta),
            ("zeta", block.zeta),
        )
        if value is not None
    }
    if overrides:
        if "zeta" not in overrides:
            overrides["zeta"] = None
        logger.info(f"Overriding Lyapunov constants: {overrides}")
        constants = replace(constants, **overrides)
    certificate = verify_drift(params, constants, grid)
    outputs.write_json("certificate.json", certificate.to_dict())
    outputs.write_csv("drift_rows.csv", certificate.row_worst)
    checks = [
        _certificate(
            "drift inequality LV <= -eta V + zeta psi",
            certificate.passed,
            {
                "worst_margin": certificate.worst_margin,
                "worst_x": certificate.worst_point[0],
                "worst_s": certificate.worst_point[1],
                "zeta": certificate.config.zeta,
            },
            started,
        )
    ]

    if block.g_check:
        started = time.perf_counter()
        g = select_g_constants(params, block.g_delta1)
        rate, g_certificate = g_drift_check(
            params,
            g.eps,
            g.beta,
            g.delta0,
            g.delta1,
            g.eps_bar,
            x_max=block.x_max,
            s_points=block.s_points,
        )
        outputs.write_json("g_certificate.json", g_certificate.to_dict())
        outputs.write_csv("g_scan.csv", g.scan)
        checks.append(
            _certificate(
                "drift inequality Lg <= -(D + C) g",
                g_certificate.passed,
                {"C": rate, "worst_margin": g_certificate.worst_margin},
                started,
            )
        )
    return checks


# ---------------------------------------------------------------------------- qsd


def _lambda_bounds(
    name: str, estimate, D: float, started: float  # noqa: N803
) -> CheckResult:
    return _certificate(
        f"0 < lambda <= D ({name})",
        estimate.within_washout(D),
        {"lambda_hat": estimate.lambda_hat, "ci": [estimate.ci_low, estimate.ci_high]},
        started,
    )


def _qsd_body(state: RunState, outputs: RunOutputs) -> list[CheckResult]:
    config = state.require_config("qsd")
    seed = config.require_seed("qsd")
    params, block, n = config.model, config.qsd, config.replicas
    started = time.perf_counter()
    checks: list[CheckResult] = []
    summary: dict = {"start": [block.x0, block.s0], "t": block.t}
    naive = fleming_viot = None
    lambdas = {}

    if block.method in ("naive", "both"):
        naive = estimate_qsd_naive(
            params,
            block.x0,
            block.s0,
            block.t,
            n,
            derive_seed(seed, PHASE_QSD_NAIVE),
            threads=state.threads,
            s_bins=block.s_bins,
        )
        outputs.write_csv("qsd_naive.csv", naive.to_rows())
        lambdas["survival"] = estimate_lambda_survival(
            params,
            block.x0,
            block.s0,
            block.lambda_times,
            n,
            derive_seed(seed, PHASE_LAMBDA),
            threads=state.threads,
        )
        h_value, (h_low, h_high) = estimate_h(
            params,
            block.x0,
            block.s0,
            max(block.lambda_times),
            n,
            lambdas["survival"],
            derive_seed(seed, PHASE_H),
            threads=state.threads,
        )
        fixed = qsd_fixed_point_check(
            params,
            naive,
            lambdas["survival"],
            block.fixed_point_dt,
            n,
            derive_seed(seed, PHASE_FIXED_POINT),
            threads=state.threads,
            tv_tolerance=QSD_TV_TOLERANCE,
        )
        summary["naive"] = naive.summary()
        summary["h"] = {"value": h_value, "ci": [h_low, h_high]}
        summary["fixed_point"] = fixed.to_dict()
        checks.append(
            _certificate("QSD fixed point", fixed.passed, fixed.to_dict(), started)
        )

    if block.method in ("fleming_viot", "both"):
        started = time.perf_counter()
        final, fleming_viot, lambdas["fleming_viot"] = evolve_fleming_viot(
            params,
            ParticleEnsemble.at_point(block.x0, block.s0, block.particles),
            block.t,
            derive_seed(seed, PHASE_FLEMING_VIOT),
            binning=naive.binning if naive is not None else None,
            s_bins=block.s_bins,
        )
        outputs.write_csv("qsd_fleming_viot.csv", fleming_viot.to_rows())
        outputs.write_csv("particles.csv", final.to_rows())
        summary["fleming_viot"] = {
            **fleming_viot.summary(),
            "resamples": final.resample_count,
        }

    summary["lambda"] = {name: estimate.to_dict() for name, estimate in lambdas.items()}
    for name, estimate in lambdas.items():
        checks.append(_lambda_bounds(name, estimate, params.D, started))
    if len(lambdas) == 2:
        first, second = lambdas.values()
        checks.append(
            _certificate(
                "lambda estimators agree",
                first.overlaps(second),
                {name: [e.ci_low, e.ci_high] for name, e in lambdas.items()},
                started,
            )
        )
    if naive is not None and fleming_viot is not None:
        rng = RngStream(derive_seed(seed, PHASE_TV)).generator()
        tv = total_variation(naive, fleming_viot)
        floor = tv_noise_floor(naive, fleming_viot, rng)
        summary["tv_naive_fleming_viot"] = {"tv": tv, "noise_floor": floor}
        checks.append(
            _certificate(
                "naive and Fleming-Viot QSD agree",
                tv <= max(QSD_TV_TOLERANCE, floor),
                {"tv": tv, "noise_floor": floor, "tolerance": QSD_TV_TOLERANCE},
                started,
            )
        )

    if block.yaglom:
        yaglom_seed = derive_seed(seed, PHASE_YAGLOM)
        rows, reports = [], []
        pairs = itertools.combinations(block.yaglom_starts, 2)
        for k, (a, b) in enumerate(pairs):
            started = time.perf_counter()
            start_a, start_b = (int(a[0]), float(a[1])), (int(b[0]), float(b[1]))
            report = yaglom_distance(
                params,
                start_a,
                start_b,
                block.yaglom_times,
                n,
                derive_seed(yaglom_seed, k),
                threads=state.threads,
                s_bins=block.s_bins,
            )
            reports.append(report.to_dict())
            label = {
                "start_a": f"{start_a[0]},{start_a[1]}",
                "start_b": f"{start_b[0]},{start_b[1]}",
            }
            rows.extend({**label, **row} for row in report.to_rows())
            last = report.rows[-1]
            checks.append(
                _certificate(
                    f"Yaglom convergence {label['start_a']} vs {label['start_b']}",
                    last["tv"] <= max(QSD_TV_TOLERANCE, last["noise_floor"])
                    and report.monotone_within_ci(),
                    {"tv": last["tv"], "t": last["t"], "omega_hat": report.omega_hat},
                    started,
                )
            )
        outputs.write_csv("yaglom.csv", rows)
        summary["yaglom"] = reports

    outputs.write_json("summary.json", summary)
    return checks


# ------------------------------------------------------------------------- bounds


def _birth_death_rows(
    params: ChemostatParams, block, n: int, seed: int
) -> list[dict]:
    spec = BirthDeathSpec.for_params(params, EquilibriumTable(params)[1])
    functions = {
        EventKind.DEATH: (p_death, p_death_exact),
        EventKind.BIRTH: (p_birth, p_birth_exact),
    }
    rows = []
    for kind, (quadrature, exact) in functions.items():
        for size in range(1, block.bd_n_max + 1):
            for ell in range(1, block.bd_ell_max + 1):
                if kind is EventKind.DEATH and ell > size:
                    continue
                rng = RngStream(seed, len(rows)).generator()
                p_mc, se = birth_death_first_events_mc(
                    spec, size, ell, block.bd_t, kind, n, rng
                )
                rows.append(
                    {
                        "kind": kind.value,
                        "n": size,
                        "ell": ell,
                        "t": block.bd_t,
                        "quad": quadrature(spec, size, ell, block.bd_t),
                        "exact": exact(spec, size, ell, block.bd_t),
                        "mc": p_mc,
                        "mc_stderr": se,
                    }
                )
    return rows


def _bounds_body(state: RunState, outputs: RunOutputs) -> list[CheckResult]:
    config = state.require_config("bounds")
    seed = config.require_seed("bounds")
    params, block, n = config.model, config.bounds, config.replicas
    s_bar_1 = EquilibriumTable(params)[1]
    checks = []

    started = time.perf_counter()
    rows = _birth_death_rows(params, block, n, derive_seed(seed, PHASE_BIRTH_DEATH))
    # Bonferroni: the whole table at the level of one 3 sigma test
    z_crit = float(stats.norm.isf(0.00135 / max(len(rows), 1)))
    for row in rows:
        sigma = max(row["mc_stderr"], 1.0 / n)
        row["z"] = (row["mc"] - row["quad"]) / sigma
    outputs.write_csv("birth_death.csv", rows)
    worst = max(abs(row["z"]) for row in rows)
    checks.append(
        _certificate(
            "birth-death quadrature vs Monte Carlo",
            worst <= z_crit,
            {"max_abs_z": worst, "z_crit": z_crit, "rows": len(rows)},
            started,
        )
    )
    checks.append(
        ToleranceCheck("birth-death quadrature vs uniformization", 1e-8).check(
            [row["quad"] for row in rows], [row["exact"] for row in rows]
        )
    )

    delta1 = block.delta1 if block.delta1 is not None else 0.2 * s_bar_1
    delta2 = block.delta2 if block.delta2 is not None else 0.4 * s_bar_1
    scenario = HittingScenario.from_dict(block.hitting) if block.hitting else None
    started = time.perf_counter()
    s0, s1 = choose_small_set_points(params, block.tau0, delta1, delta2)
    small_set = small_set_constant(params, block.tau0, s0, s1)
    restricted = restrict_small_set(
        small_set, scenario.n_k if scenario else 1, delta1, delta2
    )
    mc = small_set_mc_check(
        params,
        small_set,
        list(np.linspace(s0, s1, block.small_set_starts)),
        n,
        derive_seed(seed, PHASE_SMALL_SET),
        threads=state.threads,
    )
    outputs.write_json(
        "small_set.json",
        {
            "small_set": small_set.to_dict(),
            "restricted": restricted.to_dict(),
            "delta": [delta1, delta2],
            "mc_min_ratio": mc["min_ratio"],
            "mc_passed": mc["passed"],
        },
    )
    outputs.write_csv("small_set_mc.csv", mc["rows"])
    checks.append(
        _certificate(
            "small set minorization",
            mc["passed"],
            {"eps1": small_set.eps1, "min_ratio": mc["min_ratio"]},
            started,
        )
    )

    if scenario is not None:
        started = time.perf_counter()
        report = hitting_lower_bound(
            params,
            scenario,
            mc_paths=n,
            master_seed=derive_seed(seed, PHASE_HITTING),
            threads=state.threads,
        )
        outputs.write_json("hitting.json", report.to_dict())
        if report.passed is None:
            logger.warning(f"Hitting bound not compared: {report.skipped}")
        else:
            checks.append(
                _certificate(
                    "hitting probability lower bound",
                    report.passed,
                    {"log10_bound": report.log10_bound, "mc": report.mc},
                    started,
                )
            )

    started = time.perf_counter()
    inverse = inv_substrate_moment_bound(
        params,
        block.moment_x,
        block.moment_t,
        n=n,
        master_seed=derive_seed(seed, PHASE_INV_MOMENT),
        threads=state.threads,
    )
    checks.append(
        _certificate("E[1/S_t] bound", inverse["passed"], dict(inverse), started)
    )

    started = time.perf_counter()
    g = select_g_constants(params)
    x, s = block.exp_moment_start or (1, 1.5 * s_bar_1)
    moment = exp_moment_check(
        params,
        g,
        int(x),
        float(s),
        block.exp_moment_t_cap,
        n,
        derive_seed(seed, PHASE_EXP_MOMENT),
        threads=state.threads,
    )
    outputs.write_json(
        "moments.json",
        {
            "inverse_substrate": inverse,
            "exponential": moment.to_dict(),
            "g": g.to_dict(),
        },
    )
    if moment.inconclusive:
        logger.warning(
            f"Exponential moment inconclusive: {moment.censored_fraction:.2%} censored"
        )
    else:
        checks.append(
            _certificate(
                "exponential moment of the entrance time",
                moment.passed,
                {"mc": moment.mc, "bound": moment.bound},
                started,
            )
        )
    return checks


# ------------------------------------------------------------------------- report


def _report_body(runs_dir: Path):
    def body(state: RunState, outputs: RunOutputs) -> list[CheckResult]:
        runs, results = [], []
        for path in find_manifests(runs_dir):
            manifest = RunManifest.read(path)
            if manifest.subcommand == "report":
                continue
            modified = manifest.verify(path.parent)
            if modified:
                logger.warning(
                    f"{path.parent}: outputs changed since the run: {modified}"
                )
            runs.append(
                {
                    "path": str(path.parent),
                    "subcommand": manifest.subcommand,
                    "started_at": manifest.started_at,
                    "tool_version": manifest.tool_version,
                    "wall_clock_seconds": manifest.wall_clock_seconds,
                    "passed": manifest.passed,
                    "outputs": manifest.outputs,
                    "modified_outputs": modified,
                }
            )
            results.extend(
                CheckResult.from_dict(
                    {**check, "check": f"{manifest.subcommand}: {check['check']}"}
                )
                for check in manifest.checks
            )
        if not runs:
            raise ConfigurationError(f"no run manifests below {runs_dir}")

        report = CheckReport("chemostat-qsd run summary", results)
        outputs.write_json(
            "summary.json",
            {
                "runs": runs,
                "subcommands": sorted({run["subcommand"] for run in runs}),
                "checks": [result.to_dict() for result in results],
                "passed": report.overall_passed,
            },
        )
        report.to_markdown(outputs.track(outputs.run_dir / "summary.md"))
        return []

    return body


# ---------------------------------------------------------------------------- CLI


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="YAML run configuration",
)
@click.option(
    "--seed", type=click.IntRange(0, 2**64 - 1), help="Overrides the file seed"
)
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Output directory (default: output_dir from the config, else ./runs)",
)
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    help=f"Worker processes [env {THREADS_ENV}]",
)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option(
    "--log-file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Also log to a file",
)
@click.version_option(__version__, prog_name="chemostat-qsd")
@click.pass_context
def cli(ctx, config_path, seed, out_dir, threads, verbose, log_file):
    """Simulation and verification toolkit for the stochastic chemostat."""
    setup_logging("DEBUG" if verbose else "INFO", log_file)
    config = parse_config(config_path) if config_path else None
    if config is not None and seed is not None:
        config = replace(config, seed=seed)
    out = out_dir or (config.output_dir if config else Path("runs"))
    ctx.obj = RunState(
        config=config, out=out, threads=_resolve_threads(threads, config)
    )


@cli.command()
@click.pass_obj
def flow(state: RunState):
    """Flow curves, inverse times and equilibria."""
    _execute(state, "flow", _flow_body)


@cli.command()
@click.pass_obj
def simulate(state: RunState):
    """Trajectories plus first-event and mean-envelope checks."""
    _execute(state, "simulate", _simulate_body)


@cli.command("verify-lyapunov")
@click.pass_obj
def verify_lyapunov(state: RunState):
    """Select Lyapunov constants and certify both drift inequalities."""
    _execute(state, "verify-lyapunov", _lyapunov_body)


@cli.command()
@click.pass_obj
def qsd(state: RunState):
    """QSD histograms, extinction rate and Yaglom distances."""
    _execute(state, "qsd", _qsd_body)


@cli.command()
@click.pass_obj
def bounds(state: RunState):
    """Explicit bounds and their Monte Carlo cross-checks."""
    _execute(state, "bounds", _bounds_body)


@cli.command()
@click.argument(
    "runs_dir", type=click.Path(exists=True, file_okay=False, path_type=Path)
)
@click.pass_obj
def report(state: RunState, runs_dir: Path):
    """Aggregate the run manifests below RUNS_DIR into summary.json."""
    _execute(state, "report", _report_body(runs_dir), {"runs_dir": str(runs_dir)})


def run(argv: list[str] | None = None) -> int:
    """Run the CLI and map errors to exit codes.

    0 success, 1 configuration or precondition error, 2 insufficient
    statistical power, 3 broken internal invariant or unexpected error.
    """
    try:
        result = cli.main(args=argv, prog_name="chemostat-qsd", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except ChemostatError as e:
        logger.error(f"{type(e).__name__}: {e}")
        for issue in getattr(e, "issues", []):
            logger.error(f"  - {issue}")
        if isinstance(e, NumericError) and e.diagnostics:
            logger.error(f"  diagnostics: {e.diagnostics}")
        return e.exit_code
    except Exception:
        logger.exception("Unexpected error")
        return 3
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
