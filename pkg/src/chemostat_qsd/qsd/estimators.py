"""Monte Carlo estimators of the QSD, the extinction rate λ and h.

Every estimator runs its replicas through ``run_replicas`` so results are
identical for any thread count.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from loguru import logger
from scipy import stats

from ..common.errors import (
    InternalInvariantError,
    PreconditionError,
    StatisticalPowerError,
)
from ..common.rng import RngStream
from ..flow.equilibria import check_count, equilibrium
from ..flow.solver import FlowSolverConfig
from ..lyapunov.functions import W
from ..model.params import ChemostatParams
from ..simulate.engine import SIMULATION_CONFIG, extinction_time, simulate_path
from ..simulate.ensemble import run_replicas
from .histogram import (
    DEFAULT_S_BINS,
    Binning,
    QsdEstimate,
    total_variation,
    tv_bootstrap_ci,
    tv_noise_floor,
)

MIN_NAIVE_PATHS = 1_000
MIN_SURVIVORS = 100
MIN_SURVIVAL_PATHS = 10_000
SURVIVAL_WINDOW = (0.01, 0.5)
MIN_H_SURVIVAL = 0.005
Z95 = 1.959963984540054

BOUNDARY_FLAG = "s0_at_boundary: bias near s = 0 is not quantified"
OMEGA_NOISE_FLAG = "omega_fit_below_noise_floor: fewer than two TVs exceed their floor"

# Stream offsets keeping the replicas of different estimators disjoint
_SECOND_START_STREAM = 1 << 40
_AUXILIARY_STREAM = 1 << 48


class LambdaMethod(Enum):
    SURVIVAL_REGRESSION = "survival_regression"
    FLEMING_VIOT_KILL_RATE = "fleming_viot_kill_rate"


@dataclass
class LambdaEstimate:
    """Point estimate and 95% interval of the extinction rate λ."""

    lambda_hat: float
    ci_low: float
    ci_high: float
    method: LambdaMethod
    window: tuple[float, float]
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.ci_low <= self.lambda_hat <= self.ci_high:
            raise InternalInvariantError(
                "lambda interval does not contain its estimate",
                diagnostics={
                    "lambda_hat": self.lambda_hat,
                    "ci": (self.ci_low, self.ci_high),
                },
            )

    @property
    def stderr(self) -> float:
        return (self.ci_high - self.ci_low) / (2 * Z95)

    @property
    def width(self) -> float:
        return self.ci_high - self.ci_low

    def overlaps(self, other: "LambdaEstimate") -> bool:
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high

    def within_washout(self, D: float) -> bool:  # noqa: N803
        """0 < λ ≤ D: the interval excludes zero and the estimate stays under D."""
        return bool(self.ci_low > 0 and self.lambda_hat <= D)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda_hat": self.lambda_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "method": self.method.value,
            "window": list(self.window),
            **self.details,
        }


@dataclass(frozen=True)
class _StatesTask:
    """States (x, s) of one path at each requested time; x = 0 once extinct."""

    params: ChemostatParams
    x0: int
    s0: float
    times: tuple[float, ...]
    config: FlowSolverConfig = SIMULATION_CONFIG

    def __call__(self, index: int, rng: np.random.Generator) -> list[tuple[int, float]]:
        horizon = max(self.times)
        if horizon == 0:
            return [(self.x0, self.s0)] * len(self.times)
        trajectory = simulate_path(
            self.params, self.x0, self.s0, horizon, rng, self.config
        )
        states = []
        for t in self.times:
            if not trajectory.survived(t):
                states.append((0, math.nan))
                continue
            state = trajectory.state_at(t)
            states.append((state.x, state.s))
        return states


@dataclass(frozen=True)
class _SeededStatesTask:
    """Like ``_StatesTask`` with the start taken from a per-index table."""

    params: ChemostatParams
    xs: tuple[int, ...]
    ss: tuple[float, ...]
    horizon: float
    config: FlowSolverConfig = SIMULATION_CONFIG

    def __call__(self, index: int, rng: np.random.Generator) -> tuple[int, float]:
        task = _StatesTask(
            self.params, self.xs[index], self.ss[index], (self.horizon,), self.config
        )
        return task(index, rng)[0]


@dataclass(frozen=True)
class _ExtinctionTask:
    params: ChemostatParams
    x0: int
    s0: float
    t_cap: float
    config: FlowSolverConfig = SIMULATION_CONFIG

    def __call__(self, index: int, rng: np.random.Generator) -> float:
        return float(
            extinction_time(self.params, self.x0, self.s0, self.t_cap, rng, self.config)
        )


def _boundary_flags(s0: float) -> list[str]:
    if s0 == 0:
        logger.warning("Run starts at s0 = 0; " + BOUNDARY_FLAG)
        return [BOUNDARY_FLAG]
    return []


def _survivors(states: list[tuple[int, float]]) -> tuple[np.ndarray, np.ndarray]:
    xs = np.array([x for x, _ in states if x >= 1], dtype=int)
    ss = np.array([s for x, s in states if x >= 1], dtype=float)
    return xs, ss


def _require_survivors(count: int, needed: int, where: str) -> None:
    if count < needed:
        raise StatisticalPowerError(
            f"{where}: only {count} survivors (< {needed}); "
            "use the Fleming-Viot estimator or more paths"
        )


def estimate_qsd_naive(
    params: ChemostatParams,
    x0: int,
    s0: float,
    t: float,
    n: int,
    master_seed: int,
    threads: int = 1,
    binning: Binning | None = None,
    s_bins: int = DEFAULT_S_BINS,
    progress: bool = False,
) -> QsdEstimate:
    """Law of (X_t, S_t) given T_Ext > t from n independent paths.

    Raises:
        PreconditionError: n < 1000 or t < 0
        StatisticalPowerError: fewer than 100 paths survive to t
    """
    x0 = check_count(x0, "x0", minimum=1)
    if n < MIN_NAIVE_PATHS:
        raise PreconditionError(
            f"naive estimator needs n >= {MIN_NAIVE_PATHS}, got {n}"
        )
    if t < 0:
        raise PreconditionError(f"t must be nonnegative, got {t}")
    s_bar_1 = equilibrium(params, 1)
    flags = _boundary_flags(s0)

    if t == 0:
        xs, ss = np.full(n, x0), np.full(n, float(s0))
    else:
        states = run_replicas(
            _StatesTask(params, x0, float(s0), (t,)),
            n,
            master_seed,
            threads=threads,
            progress=progress,
            desc="naive paths",
        )
        xs, ss = _survivors([row[0] for row in states])
        _require_survivors(xs.size, MIN_SURVIVORS, "naive QSD estimate")

    binning = binning or Binning.fit(xs, s_bar_1, s_bins)
    estimate = QsdEstimate.from_samples(xs, ss, binning, t, "naive", flags)
    logger.info(
        f"Naive QSD at t={t}: {estimate.n}/{n} survivors, "
        f"mean x {estimate.mean_x():.3f}, {estimate.outside} outside (0, s_bar_1)"
    )
    return estimate


def estimate_lambda_survival(
    params: ChemostatParams,
    x0: int,
    s0: float,
    times,
    n: int,
    master_seed: int,
    threads: int = 1,
    base_stream: int = 0,
    progress: bool = False,
) -> LambdaEstimate:
    """Weighted least-squares slope of -log P̂(T_Ext > t) on the survival window.

    Only grid times with P̂ in [0.01, 0.5] enter the fit; weights come from
    the binomial variance of log P̂.

    Raises:
        PreconditionError: fewer than 4 increasing times, or n < 10⁴
        StatisticalPowerError: fewer than two times fall in the window
    """
    times = np.asarray(times, dtype=float)
    if times.size < 4 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise PreconditionError("times must be >= 4 increasing nonnegative values")
    if n < MIN_SURVIVAL_PATHS:
        raise PreconditionError(f"need n >= {MIN_SURVIVAL_PATHS} paths, got {n}")

    extinct = np.asarray(
        run_replicas(
            _ExtinctionTask(
                params, check_count(x0, "x0", 1), float(s0), float(times[-1])
            ),
            n,
            master_seed,
            threads=threads,
            base_stream=base_stream,
            progress=progress,
            desc="extinction times",
        )
    )
    survival = np.array([(extinct > t).mean() for t in times])
    lo, hi = SURVIVAL_WINDOW
    usable = (survival >= lo) & (survival <= hi)
    if usable.sum() < 2:
        raise StatisticalPowerError(
            f"only {int(usable.sum())} grid times have survival in [{lo}, {hi}]; "
            f"survival ranges {survival.min():.3g}..{survival.max():.3g}"
        )

    t_fit, p_fit = times[usable], survival[usable]
    sigma = np.sqrt((1.0 - p_fit) / (n * p_fit))
    coefficients, covariance = np.polyfit(
        t_fit, -np.log(p_fit), 1, w=1.0 / sigma, cov="unscaled"
    )
    slope, slope_se = float(coefficients[0]), float(math.sqrt(covariance[0, 0]))
    estimate = LambdaEstimate(
        lambda_hat=slope,
        ci_low=slope - Z95 * slope_se,
        ci_high=slope + Z95 * slope_se,
        method=LambdaMethod.SURVIVAL_REGRESSION,
        window=(float(t_fit[0]), float(t_fit[-1])),
        details={
            "n": n,
            "points": int(usable.sum()),
            "start": {"x": x0, "s": s0},
            "survival": survival.tolist(),
            "times": times.tolist(),
        },
    )
    logger.info(
        f"lambda (survival regression) = {slope:.4g} "
        f"[{estimate.ci_low:.4g}, {estimate.ci_high:.4g}] "
        f"from {int(usable.sum())} points"
    )
    return estimate


def estimate_h(
    params: ChemostatParams,
    x: int,
    s: float,
    t_large: float,
    n: int,
    lambda_estimate: LambdaEstimate,
    master_seed: int,
    threads: int = 1,
    base_stream: int = 0,
) -> tuple[float, tuple[float, float]]:
    """ĥ(x, s) = e^{λ̂t}P̂(T_Ext > t) with a 95% log-scale interval.

    Raises:
        StatisticalPowerError: P̂(T_Ext > t_large) < 0.005
    """
    extinct = np.asarray(
        run_replicas(
            _ExtinctionTask(params, check_count(x, "x", 1), float(s), float(t_large)),
            n,
            master_seed,
            threads=threads,
            base_stream=base_stream,
            desc="h paths",
        )
    )
    survival = float((extinct > t_large).mean())
    if survival < MIN_H_SURVIVAL:
        raise StatisticalPowerError(
            f"survival {survival:.4g} at t={t_large} is below {MIN_H_SURVIVAL}"
        )
    value = math.exp(lambda_estimate.lambda_hat * t_large) * survival
    log_se = math.sqrt(
        (t_large * lambda_estimate.stderr) ** 2 + (1.0 - survival) / (n * survival)
    )
    ci = (value * math.exp(-Z95 * log_se), value * math.exp(Z95 * log_se))
    logger.debug(f"h({x}, {s}) = {value:.4g} [{ci[0]:.4g}, {ci[1]:.4g}]")
    return value, ci


@dataclass
class YaglomReport:
    """TV between two conditioned laws along a time grid, with a decay fit."""

    starts: tuple[tuple[int, float], tuple[int, float]]
    rows: list[dict[str, float]]
    omega_hat: float
    omega_ci: tuple[float, float]
    flags: list[str] = field(default_factory=list)

    def tv(self) -> np.ndarray:
        return np.array([row["tv"] for row in self.rows])

    def monotone_within_ci(self) -> bool:
        """Each TV is at most the previous one's upper bound."""
        return all(
            later["tv"] <= earlier["ci_high"]
            for earlier, later in zip(self.rows, self.rows[1:], strict=False)
        )

    def to_rows(self) -> list[dict[str, float]]:
        return self.rows

    def to_dict(self) -> dict[str, Any]:
        return {
            "starts": [list(start) for start in self.starts],
            "omega_hat": self.omega_hat,
            "omega_ci": list(self.omega_ci),
            "monotone_within_ci": self.monotone_within_ci(),
            "flags": self.flags,
            "rows": self.rows,
        }


def _log_rate(earlier: float, later: float, span: float) -> float:
    """log(earlier/later)/span, sending zero endpoints to ±∞."""
    if earlier <= 0:
        return -math.inf
    if later <= 0:
        return math.inf
    return math.log(earlier / later) / span


def _decay_fit(
    rows: list[dict[str, float]],
) -> tuple[float, tuple[float, float], list[str]]:
    """ω̂ and its 95% interval from log TV against t.

    Rows above the noise floor are used; with fewer than two of them every
    positive TV is used and the fit is flagged. Two points give the exact
    slope, bracketed by the bootstrap bounds of both TVs.
    """
    flags = []
    points = [r for r in rows if r["tv"] > max(r["noise_floor"], 0.0)]
    if len(points) < 2:
        points = [r for r in rows if r["tv"] > 0]
        flags.append(OMEGA_NOISE_FLAG)
    if len(points) < 2:
        return math.nan, (math.nan, math.nan), flags
    points = sorted(points, key=lambda r: r["t"])

    if len(points) == 2:
        first, second = points
        span = second["t"] - first["t"]
        omega = _log_rate(first["tv"], second["tv"], span)
        low = _log_rate(first["ci_low"], second["ci_high"], span)
        high = _log_rate(first["ci_high"], second["ci_low"], span)
        return omega, (min(low, omega), max(high, omega)), flags

    fit = stats.linregress([r["t"] for r in points], np.log([r["tv"] for r in points]))
    omega = -float(fit.slope)
    return omega, (omega - Z95 * fit.stderr, omega + Z95 * fit.stderr), flags


def yaglom_distance(
    params: ChemostatParams,
    start_a: tuple[int, float],
    start_b: tuple[int, float],
    times,
    n: int,
    master_seed: int,
    threads: int = 1,
    s_bins: int = DEFAULT_S_BINS,
    resamples: int = 200,
) -> YaglomReport:
    """Distance between the laws conditioned on survival from two starts.

    ω̂ is minus the slope of log TV against t, fitted where TV exceeds its
    noise floor.

    Raises:
        StatisticalPowerError: fewer than 100 survivors at some time
    """
    times = tuple(float(t) for t in times)
    if not times or min(times) < 0:
        raise PreconditionError("times must be nonnegative and nonempty")
    if len(set(times)) < 2:
        raise PreconditionError("the decay fit needs at least two distinct times")
    starts = (
        (check_count(start_a[0], "x", 1), float(start_a[1])),
        (check_count(start_b[0], "x", 1), float(start_b[1])),
    )
    flags = _boundary_flags(starts[0][1]) or _boundary_flags(starts[1][1])
    s_bar_1 = equilibrium(params, 1)
    runs = [
        run_replicas(
            _StatesTask(params, x, s, times),
            n,
            master_seed,
            threads=threads,
            base_stream=offset,
            desc=f"yaglom paths from ({x}, {s})",
        )
        for (x, s), offset in zip(starts, (0, _SECOND_START_STREAM), strict=True)
    ]
    rng = RngStream(master_seed, _AUXILIARY_STREAM).generator()

    rows = []
    for k, t in enumerate(times):
        samples = []
        for run in runs:
            xs, ss = _survivors([states[k] for states in run])
            _require_survivors(xs.size, MIN_SURVIVORS, f"Yaglom distance at t={t}")
            samples.append((xs, ss))
        pooled = np.concatenate([xs for xs, _ in samples])
        binning = Binning.fit(pooled, s_bar_1, s_bins)
        a, b = (
            QsdEstimate.from_samples(xs, ss, binning, t, "naive") for xs, ss in samples
        )
        tv, low, high = tv_bootstrap_ci(a, b, rng, resamples)
        rows.append(
            {
                "t": t,
                "tv": tv,
                "ci_low": low,
                "ci_high": high,
                "noise_floor": tv_noise_floor(a, b, rng, resamples),
                "survivors_a": a.n,
                "survivors_b": b.n,
            }
        )

    omega, omega_ci, fit_flags = _decay_fit(rows)
    tvs = [round(r["tv"], 4) for r in rows]
    logger.info(f"Yaglom distance: TV {tvs}, omega {omega:.4g}")
    return YaglomReport(starts, rows, omega, omega_ci, flags + fit_flags)


@dataclass
class MassRatioReport:
    """Ratios E_(y,r)[ψ(X_t)] / E_(x,s)[ψ(X_t)] over sampled points of K."""

    points: list[tuple[int, float]]
    times: list[float]
    means: np.ndarray
    ratios: np.ndarray
    trend_slope: float
    trend_p_value: float

    @property
    def max_ratio(self) -> np.ndarray:
        return np.nanmax(self.ratios, axis=(1, 2))

    @property
    def bounded(self) -> bool:
        """No significant positive trend of the max ratio at 95%."""
        if math.isnan(self.trend_p_value):
            return True
        return not (self.trend_slope > 0 and self.trend_p_value / 2 < 0.05)

    def to_dict(self) -> dict[str, Any]:
        return {
            "points": [list(point) for point in self.points],
            "times": self.times,
            "max_ratio": self.max_ratio.tolist(),
            "overall_max_ratio": float(np.nanmax(self.max_ratio)),
            "trend_slope": self.trend_slope,
            "trend_p_value": self.trend_p_value,
            "bounded": self.bounded,
        }


def compact_points(n_k: int, s_lo: float, s_hi: float) -> list[tuple[int, float]]:
    """Corners and centre of ⟦1, n_k⟧ × [s_lo, s_hi]."""
    points = [(1, s_lo), (1, s_hi), (n_k, s_lo), (n_k, s_hi)]
    points.append((max(1, (n_k + 1) // 2), 0.5 * (s_lo + s_hi)))
    return list(dict.fromkeys(points))


def mass_ratio_diagnostic(
    params: ChemostatParams,
    n_k: int,
    s_lo: float,
    s_hi: float,
    times,
    n: int,
    master_seed: int,
    threads: int = 1,
) -> MassRatioReport:
    """Estimate E[ψ(X_t)] from each sampled point of K and all pairwise ratios.

    Raises:
        PreconditionError: K is not inside ℕ* × (0, s̄₁)
    """
    n_k = check_count(n_k, "n_k", minimum=1)
    s_bar_1 = equilibrium(params, 1)
    if not 0 < s_lo <= s_hi < s_bar_1:
        raise PreconditionError(
            f"need 0 < s_lo <= s_hi < s_bar_1 = {s_bar_1:.6g}, got [{s_lo}, {s_hi}]"
        )
    times = [float(t) for t in times]
    points = compact_points(n_k, s_lo, s_hi)

    means = np.empty((len(times), len(points)))
    for j, (x, s) in enumerate(points):
        run = run_replicas(
            _StatesTask(params, x, s, tuple(times)),
            n,
            master_seed,
            threads=threads,
            base_stream=j * _SECOND_START_STREAM,
            desc=f"mass ratio paths from ({x}, {s})",
        )
        means[:, j] = np.array([[state[0] for state in states] for states in run]).mean(
            axis=0
        )

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = means[:, :, None] / means[:, None, :]
    max_ratio = np.nanmax(np.where(np.isfinite(ratios), ratios, np.nan), axis=(1, 2))
    if len(times) >= 3 and np.all(np.isfinite(max_ratio)):
        fit = stats.linregress(times, max_ratio)
        slope, p_value = float(fit.slope), float(fit.pvalue)
    else:
        slope, p_value = math.nan, math.nan
    report = MassRatioReport(points, times, means, ratios, slope, p_value)
    logger.info(
        f"Mass ratio: max {float(np.nanmax(max_ratio)):.4g}, "
        f"trend slope {slope:.3g} (p={p_value:.3g}), bounded={report.bounded}"
    )
    return report


@dataclass
class FixedPointReport:
    """Evolution of a QSD estimate over Δt, compared with itself."""

    dt: float
    tv: float
    tv_noise_floor: float
    survival: float
    expected_survival: float
    survival_ci: tuple[float, float]
    tv_tolerance: float
    paths: int = 0

    @property
    def law_preserved(self) -> bool:
        return self.tv <= max(self.tv_tolerance, self.tv_noise_floor)

    @property
    def resolved(self) -> bool:
        """Whether the noise floor is fine enough to test TV against the tolerance."""
        return self.tv_noise_floor <= self.tv_tolerance

    @property
    def survival_consistent(self) -> bool:
        low, high = self.survival_ci
        return low <= self.expected_survival <= high

    @property
    def passed(self) -> bool:
        return self.law_preserved and self.survival_consistent

    def to_dict(self) -> dict[str, Any]:
        return {
            "dt": self.dt,
            "tv": self.tv,
            "tv_noise_floor": self.tv_noise_floor,
            "tv_tolerance": self.tv_tolerance,
            "survival": self.survival,
            "expected_survival": self.expected_survival,
            "survival_ci": list(self.survival_ci),
            "paths": self.paths,
            "resolved": self.resolved,
            "law_preserved": self.law_preserved,
            "survival_consistent": self.survival_consistent,
            "passed": self.passed,
        }


def qsd_fixed_point_check(
    params: ChemostatParams,
    estimate: QsdEstimate,
    lambda_estimate: LambdaEstimate,
    dt: float,
    n: int,
    master_seed: int,
    threads: int = 1,
    tv_tolerance: float = 0.05,
    max_paths: int | None = None,
) -> FixedPointReport:
    """Seed paths from the estimate, evolve Δt, and compare.

    The conditioned law should match the seed (TV) and survival over Δt
    should match e^{-λ̂Δt} within the combined binomial and λ̂ uncertainty.
    Paths are added in batches that double the total, up to ``max_paths``
    (default 4n), until the TV noise floor is under ``tv_tolerance``. If it
    never is, the law comparison uses the floor and the report is unresolved.
    """
    if not dt > 0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    n = check_count(n, "n", minimum=1)
    max_paths = 4 * n if max_paths is None else check_count(max_paths, "max_paths")
    if max_paths < n:
        raise PreconditionError(f"max_paths must be >= n, got {max_paths} < {n}")
    rng = RngStream(master_seed, _AUXILIARY_STREAM).generator()
    floor_rng = RngStream(master_seed, _AUXILIARY_STREAM + 1).generator()

    states: list[tuple[int, float]] = []
    batch = n
    while True:
        xs, ss = estimate.draw(batch, rng)
        states += run_replicas(
            _SeededStatesTask(
                params, tuple(int(x) for x in xs), tuple(float(s) for s in ss), dt
            ),
            batch,
            master_seed,
            threads=threads,
            base_stream=len(states),
            desc="fixed point paths",
        )
        report = _fixed_point_report(
            estimate, lambda_estimate, dt, states, tv_tolerance, floor_rng
        )
        if report.resolved or 2 * len(states) > max_paths:
            break
        logger.info(
            f"TV noise floor {report.tv_noise_floor:.4f} above {tv_tolerance}; "
            f"doubling to {2 * len(states)} paths"
        )
        batch = len(states)

    if not report.resolved:
        logger.warning(
            f"QSD fixed point unresolved at {report.paths} paths: noise floor "
            f"{report.tv_noise_floor:.4f} > {tv_tolerance}; raise replicas"
        )
    logger.info(
        f"QSD fixed point over dt={dt}: TV {report.tv:.4f}, "
        f"survival {report.survival:.4f} vs e^(-lambda dt) = "
        f"{report.expected_survival:.4f}"
    )
    return report


def _fixed_point_report(
    estimate: QsdEstimate,
    lambda_estimate: LambdaEstimate,
    dt: float,
    states: list[tuple[int, float]],
    tv_tolerance: float,
    floor_rng: np.random.Generator,
) -> FixedPointReport:
    paths = len(states)
    survivors_x, survivors_s = _survivors(states)
    _require_survivors(survivors_x.size, MIN_SURVIVORS, "QSD fixed-point check")
    evolved = QsdEstimate.from_samples(
        survivors_x, survivors_s, estimate.binning, estimate.time + dt, "fixed_point"
    )
    survival = survivors_x.size / paths
    expected = math.exp(-lambda_estimate.lambda_hat * dt)
    spread = Z95 * math.sqrt(
        survival * (1 - survival) / paths
        + (dt * expected * lambda_estimate.stderr) ** 2
    )
    return FixedPointReport(
        dt=dt,
        tv=total_variation(evolved, estimate),
        tv_noise_floor=tv_noise_floor(evolved, estimate, floor_rng),
        survival=survival,
        expected_survival=expected,
        survival_ci=(survival - spread, survival + spread),
        tv_tolerance=tv_tolerance,
        paths=paths,
    )


def lambda_start_independence(estimates: list[LambdaEstimate]) -> dict[str, Any]:
    """Pairwise CI overlap of λ̂ from different starting points."""
    pairs = [
        {
            "i": i,
            "j": j,
            "overlap": estimates[i].overlaps(estimates[j]),
            "difference": estimates[i].lambda_hat - estimates[j].lambda_hat,
        }
        for i in range(len(estimates))
        for j in range(i + 1, len(estimates))
    ]
    return {
        "lambdas": [e.lambda_hat for e in estimates],
        "pairs": pairs,
        "all_overlap": all(pair["overlap"] for pair in pairs),
    }


def h_monotone_trend(values: list[dict[str, float]]) -> dict[str, Any]:
    """Whether ĥ is nondecreasing in x at each fixed s. Reported only."""
    by_s: dict[float, list[tuple[int, float]]] = {}
    for row in values:
        by_s.setdefault(row["s"], []).append((row["x"], row["h"]))
    trend = {}
    for s, rows in by_s.items():
        ordered = [h for _, h in sorted(rows)]
        trend[s] = all(b >= a for a, b in zip(ordered, ordered[1:], strict=False))
    return {"nondecreasing_in_x": trend}


def h_over_w_grid(config, values: list[dict[str, float]]) -> dict[str, Any]:
    """ĥ/W over the estimated points; finite max is the boundedness check."""
    ratios = [
        {**row, "h_over_w": row["h"] / float(W(config, int(row["x"]), row["s"]))}
        for row in values
    ]
    worst = max(r["h_over_w"] for r in ratios) if ratios else math.nan
    return {"rows": ratios, "max_ratio": worst, "bounded": bool(math.isfinite(worst))}
