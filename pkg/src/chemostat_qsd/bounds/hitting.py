"""Lower bound on P_(x,s)(τ - ε ≤ T̃_(y,r) ≤ τ) as a product of three factors.

The path reaches a neighbourhood set of (y, r) before τ₀ (C1), stays in the
corresponding substrate interval until τ - ε (C2), and then hits (y, r) within
ε (C3). Each factor is built from P_d, P_b and exponential no-jump bounds, and
is reported with its log10 because C2 is usually far below double precision.
"""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger

from ..common.errors import ConfigurationError, PreconditionError
from ..flow.equilibria import EquilibriumTable
from ..flow.solver import time_to_reach
from ..model.params import ChemostatParams
from ..simulate.engine import SIMULATION_CONFIG, hitting_time_box, simulate_path
from ..simulate.ensemble import batch_means, run_replicas
from ..simulate.events import Outcome
from .birth_death import BirthDeathSpec, p_birth_exact, p_death_exact

MC_FLOOR = 1e-12

_SCENARIO_KEYS = {
    "n_k", "s_lo", "s_hi", "start", "target", "tau0", "tau", "eps", "delta",
    "box_halfwidth",
}  # fmt: skip


@dataclass(frozen=True)
class HittingScenario:
    """Compact K = ⟦1, n_k⟧ × [s_lo, s_hi], start, target and times."""

    n_k: int
    s_lo: float
    s_hi: float
    start: tuple[int, float]
    target: tuple[int, float]
    tau0: float
    tau: float
    eps: float
    delta: float
    box_halfwidth: float = 1e-3

    @classmethod
    def from_dict(cls, config: dict[str, Any]) -> "HittingScenario":
        unknown = sorted(set(config) - _SCENARIO_KEYS)
        issues = [f"scenario.{key}: unknown key" for key in unknown]
        issues += [
            f"scenario.{key}: missing"
            for key in sorted(_SCENARIO_KEYS - {"box_halfwidth"} - set(config))
        ]
        if issues:
            raise ConfigurationError("invalid hitting scenario", issues=sorted(issues))
        return cls(
            n_k=int(config["n_k"]),
            s_lo=float(config["s_lo"]),
            s_hi=float(config["s_hi"]),
            start=(int(config["start"][0]), float(config["start"][1])),
            target=(int(config["target"][0]), float(config["target"][1])),
            tau0=float(config["tau0"]),
            tau=float(config["tau"]),
            eps=float(config["eps"]),
            delta=float(config["delta"]),
            box_halfwidth=float(config.get("box_halfwidth", 1e-3)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_k": self.n_k,
            "s_lo": self.s_lo,
            "s_hi": self.s_hi,
            "start": list(self.start),
            "target": list(self.target),
            "tau0": self.tau0,
            "tau": self.tau,
            "eps": self.eps,
            "delta": self.delta,
            "box_halfwidth": self.box_halfwidth,
        }


@dataclass(frozen=True)
class HittingConstants:
    """Constants shared by the three factors for one compact K."""

    L: int
    s_bar_1: float
    s_bar_L: float
    mu_1: float
    mu_L: float
    M: float
    t_min: float
    margin: float
    birth_death: BirthDeathSpec

    def eps_bar(self, tau0: float) -> float:
        """Largest ε for which the neighbourhood set stays inside [s̄_L, s̄₁]."""
        half = (tau0 - self.t_min) / 2
        return min(
            3 * self.margin / self.M,
            4 * self.margin * self.birth_death.death_rate * half
            / (self.M * (1 + self.birth_death.death_rate * half)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "L_K": self.L,
            "s_bar_1": self.s_bar_1,
            "s_bar_L": self.s_bar_L,
            "M": self.M,
            "t_min": self.t_min,
            "margin": self.margin,
        }


@dataclass
class Factor:
    """One factor of the bound, kept in log10 with its named parts."""

    name: str
    log10: float
    parts: dict[str, float] = field(default_factory=dict)

    @property
    def value(self) -> float:
        return 10.0**self.log10 if self.log10 > -320 else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "log10": self.log10, **self.parts}


def _log10(value: float) -> float:
    return math.log10(value) if value > 0 else -math.inf


def hitting_constants(
    params: ChemostatParams, n_k: int, s_lo: float, s_hi: float
) -> HittingConstants:
    """L_K, t_min and M = max{D·s_in, kμ(s̄₁)L_K} for K = ⟦1, n_k⟧ × [s_lo, s_hi].

    Raises:
        PreconditionError: K is not a compact of ℕ* × (0, s̄₁)
    """
    table = EquilibriumTable(params)
    s_bar_1 = table[1]
    if n_k < 1 or not 0 < s_lo <= s_hi < s_bar_1:
        raise PreconditionError(
            f"K = [1, {n_k}] x [{s_lo}, {s_hi}] is not inside N* x (0, {s_bar_1:.6g})"
        )
    L = max(n_k, table.first_below(s_lo))
    s_bar_L = table[L]
    t_min = max(
        float(time_to_reach(params, 1, s_bar_L, s_hi)),
        float(time_to_reach(params, L, s_bar_1, s_lo)),
    )
    mu_1 = float(params.growth.eval(s_bar_1))
    return HittingConstants(
        L=L,
        s_bar_1=s_bar_1,
        s_bar_L=s_bar_L,
        mu_1=mu_1,
        mu_L=float(params.growth.eval(s_bar_L)),
        M=params.envelope_rate(L, s_bar_1),
        t_min=t_min,
        margin=min(s_lo - s_bar_L, s_bar_1 - s_hi),
        birth_death=BirthDeathSpec(mu_1, params.D),
    )


def _down_or_up(c: HittingConstants, t_down: float, t_up: float) -> tuple[float, dict]:
    """min{P_d(L, L-1, t); (μ(s̄_L)/μ(s̄₁))^{L-1} P_b(1, L-1, t)} in log10."""
    pd = p_death_exact(c.birth_death, c.L, c.L - 1, t_down)
    pb = p_birth_exact(c.birth_death, 1, c.L - 1, t_up)
    log_up = (c.L - 1) * math.log10(c.mu_L / c.mu_1) + _log10(pb)
    return min(_log10(pd), log_up), {"Pd": pd, "Pb": pb}


def c1_reach(c: HittingConstants, s: float, tau0: float) -> Factor:
    """Reach the neighbourhood set before τ₀, from substrate s."""
    if not tau0 > c.t_min:
        raise PreconditionError(f"tau0={tau0} must exceed t_min={c.t_min:.6g}")
    D, rate = c.birth_death.death_rate, c.birth_death.total_rate
    half = (tau0 - c.t_min) / 2
    gap_1 = D * abs(c.s_bar_1 - s)
    gap_L = D * abs(c.s_bar_L - s)
    delta1 = half * gap_1 / (gap_1 + c.M)
    delta2 = half * gap_L / (gap_L + c.M)
    pd = p_death_exact(c.birth_death, c.L, c.L - 1, delta1 / 2)
    pb = p_birth_exact(c.birth_death, 1, c.L - 1, delta2 / 2)
    log10 = (
        -rate * (tau0 - min(delta1, delta2)) * c.L / math.log(10)
        + _log10(pd)
        + (c.L - 1) * math.log10(c.mu_L / c.mu_1)
        + _log10(pb)
    )
    return Factor(
        "C1", log10, {"delta1": delta1, "delta2": delta2, "Pd": pd, "Pb": pb}
    )


def c_stay(
    c: HittingConstants, eps: float, delta: float, T: float  # noqa: N803
) -> Factor:
    """Stay in an interval of width β = D(Dε/4 + 1)δε/12 for time T."""
    D, rate = c.birth_death.death_rate, c.birth_death.total_rate
    beta = D * (D * eps / 4 + 1) * delta * eps / 12
    t4 = beta / (4 * c.M)
    base = (
        math.log10(c.mu_L * D / rate**2)
        - 6 * rate * c.L / D / math.log(10)
        + 2 * _log10(-math.expm1(-rate * beta / (4 * c.M)))
    )
    power = c.M * T / beta + 1
    first = min(base * power, -rate * c.L * T / math.log(10))
    second, parts = _down_or_up(c, t4, t4)
    return Factor(
        "C2", first + second, {"beta": beta, "t": t4, "power": power, **parts}
    )


def c3_reach_point(c: HittingConstants, eps: float, delta: float) -> Factor:
    """Hit the exact point within ε from the neighbourhood interval."""
    D, rate = c.birth_death.death_rate, c.birth_death.total_rate
    t_star = min(
        D * delta * eps / 4, D * (D * eps / 3 + 1) * delta * (eps / 2 - eps / 3)
    ) / c.M
    second, parts = _down_or_up(c, t_star, t_star)
    log10 = -rate * c.L * eps / 2 / math.log(10) + second
    return Factor("C3", log10, {"t_star": t_star, **parts})


@dataclass
class HittingBoundReport:
    """Analytic bound vs Monte Carlo for one scenario."""

    scenario: HittingScenario
    constants: HittingConstants
    eps_used: float
    eps_bar: float
    factors: list[Factor]
    mc: dict[str, float] | None = None
    skipped: str | None = None

    @property
    def log10_bound(self) -> float:
        return sum(f.log10 for f in self.factors)

    @property
    def bound(self) -> float:
        return 10.0**self.log10_bound if self.log10_bound > -320 else 0.0

    @property
    def passed(self) -> bool | None:
        """None when the Monte Carlo comparison was skipped."""
        if self.mc is None:
            return None
        return self.mc["p_hat"] >= self.bound - 3 * self.mc["sigma"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.to_dict(),
            **self.constants.to_dict(),
            "eps_bar": self.eps_bar,
            "eps": self.eps_used,
            **{f.name: f.to_dict() for f in self.factors},
            "bound": self.bound,
            "log10_bound": self.log10_bound,
            "mc": self.mc,
            "skipped": self.skipped,
            "passed": self.passed,
        }


def check_scenario(
    params: ChemostatParams, scenario: HittingScenario, c: HittingConstants
) -> list[str]:
    """Itemized hypothesis violations; empty when the scenario is admissible."""
    issues = []
    (x, s), (y, r) = scenario.start, scenario.target
    for name, (ell, value) in (("start", (x, s)), ("target", (y, r))):
        if not (1 <= ell <= scenario.n_k and scenario.s_lo <= value <= scenario.s_hi):
            issues.append(f"{name} ({ell}, {value}) is not in K")
    if not scenario.delta > 0:
        issues.append(f"delta must be positive, got {scenario.delta}")
    elif not abs(r - EquilibriumTable(params)[y]) > scenario.delta:
        issues.append(f"|r - s_bar_y| must exceed delta={scenario.delta}")
    if not scenario.tau0 > c.t_min:
        issues.append(f"tau0={scenario.tau0} must exceed t_min={c.t_min:.6g}")
    if not scenario.tau > scenario.tau0:
        issues.append(f"tau={scenario.tau} must exceed tau0={scenario.tau0}")
    if not scenario.eps > 0:
        issues.append(f"eps must be positive, got {scenario.eps}")
    if scenario.box_halfwidth < 0:
        issues.append("box_halfwidth must be >= 0")
    return issues


@dataclass(frozen=True)
class _WindowHitTask:
    params: ChemostatParams
    scenario: HittingScenario
    eps: float
    halfwidth: float

    def __call__(self, index: int, rng: np.random.Generator) -> float:
        sc = self.scenario
        trajectory = simulate_path(
            self.params, *sc.start, sc.tau0, rng, SIMULATION_CONFIG
        )
        if not trajectory.survived():
            return 0.0
        state = trajectory.final_state
        hit = hitting_time_box(
            self.params,
            state.x,
            state.s,
            sc.target[0],
            sc.target[1],
            self.halfwidth,
            sc.tau - sc.tau0,
            rng,
        )
        window = hit.outcome is Outcome.HIT and sc.tau0 + hit.value >= sc.tau - self.eps
        return 1.0 if window else 0.0


def _window_mc(params, scenario, eps, halfwidth, n, master_seed, threads) -> dict:
    hits = run_replicas(
        _WindowHitTask(params, scenario, eps, halfwidth),
        n,
        master_seed,
        threads=threads,
        desc="hitting window paths",
    )
    p_hat, sigma = batch_means(hits)
    return {"p_hat": p_hat, "sigma": sigma, "n": n, "box_halfwidth": halfwidth}


def hitting_lower_bound(
    params: ChemostatParams,
    scenario: HittingScenario,
    mc_paths: int = 0,
    master_seed: int = 0,
    threads: int = 1,
) -> HittingBoundReport:
    """C1·C2·C3 for the scenario, with an optional box-relaxed MC estimate.

    ε is clamped to min{τ - τ₀, ε̄}. The MC comparison is skipped when the
    bound is below 1e-12; otherwise it is repeated with the box half-width
    halved to show its sensitivity.

    Raises:
        PreconditionError: itemized hypothesis violations
    """
    c = hitting_constants(params, scenario.n_k, scenario.s_lo, scenario.s_hi)
    issues = check_scenario(params, scenario, c)
    if issues:
        raise PreconditionError(
            "hitting scenario violates its hypotheses", issues=issues
        )

    eps_bar = c.eps_bar(scenario.tau0)
    eps = min(scenario.eps, scenario.tau - scenario.tau0, eps_bar)
    if eps < scenario.eps:
        logger.warning(f"eps clamped from {scenario.eps} to {eps:.6g}")

    factors = [
        c1_reach(c, scenario.start[1], scenario.tau0),
        c_stay(c, eps, scenario.delta, scenario.tau),
        c3_reach_point(c, eps, scenario.delta),
    ]
    report = HittingBoundReport(scenario, c, eps, eps_bar, factors)
    logger.info(
        f"Hitting bound: log10 = {report.log10_bound:.4g} "
        f"(C1 {factors[0].log10:.3g}, C2 {factors[1].log10:.3g}, "
        f"C3 {factors[2].log10:.3g})"
    )

    if mc_paths <= 0:
        report.skipped = "no Monte Carlo paths requested"
    elif report.bound < MC_FLOOR:
        report.skipped = f"bound below {MC_FLOOR:g}; not verifiable by Monte Carlo"
    else:
        h = scenario.box_halfwidth
        report.mc = _window_mc(params, scenario, eps, h, mc_paths, master_seed, threads)
        halved = _window_mc(
            params, scenario, eps, h / 2, mc_paths, master_seed, threads
        )
        report.mc["p_hat_half_box"] = halved["p_hat"]
    if report.skipped:
        logger.info(f"Monte Carlo comparison skipped: {report.skipped}")
    return report
