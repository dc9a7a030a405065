"""Moment bounds: E[1/S_t] from a zero substrate, and the exponential moment
of the time to fall below s̄₁ - ε."""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger

from ..common.errors import PreconditionError
from ..flow.equilibria import check_count, equilibrium
from ..lyapunov.drift import GConstants, tail_bound
from ..model.params import ChemostatParams
from ..simulate.engine import SIMULATION_CONFIG, hitting_time_level, simulate_path
from ..simulate.ensemble import batch_means, run_replicas
from ..simulate.events import Outcome

Z99 = 2.5758293035489004
CENSOR_LIMIT = 0.01


def inv_substrate_rhs(params: ChemostatParams, x: int, t: float) -> float:
    """(D + kμ̄'_t·x·e^{μ̄_t t}) / (D·s_in·(1 - e^{-Dt})).

    μ̄_t and μ̄'_t are the suprema of μ and μ' on [0, D·s_in·t].
    """
    if not t > 0:
        raise PreconditionError(f"t must be positive, got {t}")
    reach = params.D * params.s_in * t
    mu_bar = params.growth.sup_on(reach)
    slope_bar = params.growth.deriv_sup_on(reach)
    numerator = params.D + params.k * slope_bar * x * math.exp(mu_bar * t)
    return numerator / (params.D * params.s_in * -math.expm1(-params.D * t))


@dataclass(frozen=True)
class _InverseSubstrateTask:
    params: ChemostatParams
    x: int
    t: float

    def __call__(self, index: int, rng: np.random.Generator) -> float:
        trajectory = simulate_path(
            self.params, self.x, 0.0, self.t, rng, SIMULATION_CONFIG
        )
        return 1.0 / trajectory.final_state.s


def inv_substrate_moment_bound(
    params: ChemostatParams,
    x: int,
    t: float,
    n: int = 0,
    master_seed: int = 0,
    threads: int = 1,
) -> dict[str, Any]:
    """Bound on E_(x,0)[1/S_t] and, when n > 0, its Monte Carlo estimate."""
    x = check_count(x, "x", minimum=1)
    rhs = inv_substrate_rhs(params, x, t)
    report: dict[str, Any] = {"x": x, "t": t, "rhs": rhs}
    if n > 0:
        values = run_replicas(
            _InverseSubstrateTask(params, x, t),
            n,
            master_seed,
            threads=threads,
            desc="inverse substrate paths",
        )
        mean, se = batch_means(values)
        report.update(
            mc=mean,
            mc_stderr=se,
            n=n,
            passed=bool(mean - Z99 * se <= rhs),
        )
        logger.info(
            f"E[1/S_{t}] from ({x}, 0): MC {mean:.4g} +/- {se:.2g}, bound {rhs:.4g}"
        )
    return report


@dataclass(frozen=True)
class _ExpMomentTask:
    params: ChemostatParams
    x: int
    s: float
    level: float
    t_cap: float

    def __call__(self, index: int, rng: np.random.Generator) -> tuple[float, str]:
        stop = hitting_time_level(
            self.params, self.x, self.s, self.level, self.t_cap, rng
        )
        return stop.value, stop.outcome.value


@dataclass
class ExpMomentReport:
    """E[e^{(D+C)(T_ε ∧ T_Ext)}] against A·e^{βs}."""

    x: int
    s: float
    rate: float
    bound: float
    mc: float
    mc_stderr: float
    hit_fraction: float
    censored_fraction: float
    tail: list[dict[str, float]] = field(default_factory=list)

    @property
    def inconclusive(self) -> bool:
        return self.censored_fraction > CENSOR_LIMIT

    @property
    def passed(self) -> bool:
        return self.mc - Z99 * self.mc_stderr <= self.bound and self.hit_fraction > 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "x": self.x,
            "s": self.s,
            "rate": self.rate,
            "bound": self.bound,
            "mc": self.mc,
            "mc_stderr": self.mc_stderr,
            "hit_fraction": self.hit_fraction,
            "censored_fraction": self.censored_fraction,
            "inconclusive": self.inconclusive,
            "passed": self.passed,
            "tail": self.tail,
        }


def exp_moment_check(
    params: ChemostatParams,
    constants: GConstants,
    x: int,
    s: float,
    t_cap: float,
    n: int,
    master_seed: int,
    threads: int = 1,
    tail_times: tuple[float, ...] = (0.5, 1.0, 2.0),
) -> ExpMomentReport:
    """Monte Carlo mean of e^{(D+C)T} for T = T_ε ∧ T_Ext, capped at t_cap.

    Also compares P̂(T > t) with A e^{βs} e^{-(D+C)t} on ``tail_times``.

    Raises:
        PreconditionError: s < s̄₁ or the constants give no positive rate
    """
    s_bar_1 = equilibrium(params, 1)
    if s < s_bar_1:
        raise PreconditionError(f"s={s} must be >= s_bar_1={s_bar_1:.6g}")
    rate = constants.rate
    if not rate > 0:
        raise PreconditionError(f"C must be positive, got {rate:.6g}")
    level = s_bar_1 - constants.eps
    results = run_replicas(
        _ExpMomentTask(params, check_count(x, "x", 1), float(s), level, t_cap),
        n,
        master_seed,
        threads=threads,
        desc="exponential moment paths",
    )
    times = np.array([value for value, _ in results])
    outcomes = [outcome for _, outcome in results]
    mean, se = batch_means(np.exp((params.D + rate) * times))
    bound = constants.amplitude * math.exp(constants.beta * s)
    tail = [
        {
            "t": t,
            "p_hat": float(np.mean(times > t)),
            "bound": tail_bound(
                rate, constants.amplitude, constants.beta, s, t, params.D
            ),
        }
        for t in tail_times
    ]
    report = ExpMomentReport(
        x=x,
        s=s,
        rate=rate,
        bound=bound,
        mc=mean,
        mc_stderr=se,
        hit_fraction=outcomes.count(Outcome.HIT.value) / n,
        censored_fraction=outcomes.count(Outcome.CENSORED.value) / n,
        tail=tail,
    )
    if report.inconclusive:
        logger.warning(
            f"{report.censored_fraction:.1%} of paths hit the cap t={t_cap}; "
            "the exponential moment check is inconclusive"
        )
    logger.info(f"E[exp((D+C)T)] = {mean:.4g} +/- {se:.2g} vs bound {bound:.4g}")
    return report
