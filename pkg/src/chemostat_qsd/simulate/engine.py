"""Exact simulation of (X_t, S_t) by thinning.

Candidate jump times arrive at the constant intensity (D + b)·x with
b ≥ μ(S_u) along the current flow segment; a candidate at elapsed time u is a
washout with probability D/(D + b), a division with probability
μ(S_u)/(D + b), and is rejected otherwise.
"""

import math
from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.integrate import quad

from ..common.errors import InternalInvariantError, PreconditionError
from ..flow.equilibria import check_count, equilibrium
from ..flow.solver import FlowSegment, FlowSolverConfig, time_to_reach
from ..model.params import ChemostatParams, HybridState
from .events import JumpEvent, JumpKind, Outcome, StoppingTime, Trajectory

SIMULATION_CONFIG = FlowSolverConfig.for_simulation()

# Relative slack for solver noise when comparing μ(S_u) with the bound
_BOUND_SLACK = 1e-9


@dataclass
class StepResult:
    """Outcome of one thinning step started at local time 0."""

    elapsed: float
    event: JumpEvent | None
    s_end: float
    candidates: int


def default_rate_bound(params: ChemostatParams, s: float) -> float:
    """μ(s̄₁ ∨ s), valid along the whole future of the path from s."""
    return float(params.growth.eval(max(equilibrium(params, 1), s)))


def step(
    params: ChemostatParams,
    state: HybridState,
    rate_bound: float,
    rng: np.random.Generator,
    cap: float = math.inf,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> StepResult:
    """Simulate up to the next jump, or to ``cap`` if none happens first.

    Raises:
        PreconditionError: state.x is 0 (absorbing) or rate_bound not positive
        InternalInvariantError: μ(S_u) exceeded rate_bound at a candidate
    """
    if state.x < 1:
        raise PreconditionError("step requires x >= 1; x = 0 is absorbing")
    if not rate_bound > 0:
        raise PreconditionError(f"rate_bound must be positive, got {rate_bound}")

    D = params.D
    intensity = (D + rate_bound) * state.x
    segment = FlowSegment(
        params, state.x, state.s, config, horizon=min(cap, 4.0 / intensity)
    )
    u = 0.0
    candidates = 0
    while True:
        u += rng.exponential(1.0 / intensity)
        if u >= cap:
            return StepResult(cap, None, segment(cap), candidates)
        candidates += 1
        s_u = segment(u)
        mu_u = float(params.growth.eval(s_u))
        if mu_u > rate_bound * (1 + _BOUND_SLACK):
            raise InternalInvariantError(
                "thinning bound below growth rate",
                diagnostics={
                    "rate_bound": rate_bound,
                    "mu": mu_u,
                    "s": s_u,
                    "x": state.x,
                    "u": u,
                },
            )
        mark = rng.random() * (D + rate_bound)
        if mark < D:
            event = JumpEvent(u, JumpKind.WASHOUT, state.x - 1, s_u)
        elif mark < D + mu_u:
            event = JumpEvent(u, JumpKind.DIVISION, state.x + 1, s_u)
        else:
            continue
        return StepResult(u, event, s_u, candidates)


def simulate_path(
    params: ChemostatParams,
    x0: int,
    s0: float,
    horizon: float,
    rng: np.random.Generator,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> Trajectory:
    """One trajectory on [0, horizon], stopped at extinction."""
    initial = HybridState(check_count(x0, "x0"), float(s0))
    if not horizon > 0:
        raise PreconditionError(f"horizon must be positive, got {horizon}")
    trajectory = Trajectory(
        initial=initial, horizon=horizon, params=params, solver=config
    )
    if initial.x == 0:
        trajectory.extinct_at = 0.0
        return trajectory

    t, state = 0.0, initial
    while t < horizon:
        result = step(
            params, state, default_rate_bound(params, state.s), rng, horizon - t, config
        )
        if result.event is None:
            break
        t += result.elapsed
        event = JumpEvent(t, result.event.kind, result.event.x_after, result.s_end)
        trajectory.events.append(event)
        state = HybridState(event.x_after, event.s_at_jump)
        if state.x == 0:
            trajectory.extinct_at = t
            break
    return trajectory


def extinction_time(
    params: ChemostatParams,
    x0: int,
    s0: float,
    t_cap: float,
    rng: np.random.Generator,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> StoppingTime:
    """T_Ext, or the cap marked censored."""
    if not t_cap > 0:
        raise PreconditionError(f"t_cap must be positive, got {t_cap}")
    if x0 == 0:
        return StoppingTime(0.0, Outcome.EXTINCT)
    trajectory = simulate_path(params, x0, s0, t_cap, rng, config)
    if trajectory.extinct_at is not None:
        return StoppingTime(trajectory.extinct_at, Outcome.EXTINCT)
    return StoppingTime(t_cap, Outcome.CENSORED)


def _first_passage(
    params: ChemostatParams,
    x0: int,
    s0: float,
    t_cap: float,
    rng: np.random.Generator,
    entry_time,
    config: FlowSolverConfig,
) -> StoppingTime:
    """Shared loop: ``entry_time(state)`` is the flow time to the target set
    from ``state`` with x frozen (0 if already inside, inf if unreachable)."""
    state = HybridState(check_count(x0, "x0"), float(s0))
    if state.x == 0:
        return StoppingTime(0.0, Outcome.EXTINCT)
    t = 0.0
    while True:
        entry = entry_time(state)
        if entry == 0:
            return StoppingTime(t, Outcome.HIT)
        cap = min(t_cap - t, entry)
        result = step(
            params, state, default_rate_bound(params, state.s), rng, cap, config
        )
        if result.event is None:
            if entry <= t_cap - t:
                return StoppingTime(t + entry, Outcome.HIT)
            return StoppingTime(t_cap, Outcome.CENSORED)
        t += result.elapsed
        state = HybridState(result.event.x_after, result.s_end)
        if state.x == 0:
            return StoppingTime(t, Outcome.EXTINCT)


def hitting_time_box(
    params: ChemostatParams,
    x0: int,
    s0: float,
    target_x: int,
    target_s: float,
    box_halfwidth: float,
    t_cap: float,
    rng: np.random.Generator,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> StoppingTime:
    """First time X = target_x and |S - target_s| ≤ box_halfwidth.

    Entry into the box along a segment is located with ``time_to_reach`` on
    the nearer box edge. A zero half-width asks for the exact point.
    """
    target_x = check_count(target_x, "target_x", minimum=1)
    if box_halfwidth < 0:
        raise PreconditionError(f"box_halfwidth must be >= 0, got {box_halfwidth}")
    lo = max(target_s - box_halfwidth, 0.0)
    hi = target_s + box_halfwidth

    def entry_time(state: HybridState) -> float:
        if state.x != target_x:
            return math.inf
        if lo <= state.s <= hi:
            return 0.0
        edge = lo if state.s < lo else hi
        return float(time_to_reach(params, state.x, state.s, edge, config))

    return _first_passage(params, x0, s0, t_cap, rng, entry_time, config)


def hitting_time_level(
    params: ChemostatParams,
    x0: int,
    s0: float,
    level: float,
    t_cap: float,
    rng: np.random.Generator,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> StoppingTime:
    """First time S ≤ level while X ≥ 1 (extinction reported separately)."""

    def entry_time(state: HybridState) -> float:
        if state.s <= level:
            return 0.0
        return float(time_to_reach(params, state.x, state.s, level, config))

    return _first_passage(params, x0, s0, t_cap, rng, entry_time, config)


def first_event_survival(
    params: ChemostatParams,
    x: int,
    s: float,
    delta: float,
    config: FlowSolverConfig | None = None,
) -> float:
    """P(T₁ > δ) = exp(-x ∫₀^δ (μ(φ(x, s, u)) + D) du) by quadrature."""
    x = check_count(x, "x", minimum=1)
    if delta < 0:
        raise PreconditionError(f"delta must be nonnegative, got {delta}")
    if delta == 0:
        return 1.0
    segment = FlowSegment(params, x, s, config or FlowSolverConfig(), horizon=delta)
    integral, error = quad(
        lambda u: float(params.growth.eval(segment(u))),
        0.0,
        delta,
        epsabs=1e-14,
        epsrel=1e-11,
        limit=200,
    )
    logger.debug(f"first_event_survival quadrature error estimate {error:.1e}")
    return math.exp(-x * (integral + params.D * delta))


def first_event_split(
    params: ChemostatParams,
    x: int,
    s: float,
    u: float,
    config: FlowSolverConfig | None = None,
) -> float:
    """Probability that a first jump at elapsed time u is a division."""
    x = check_count(x, "x", minimum=1)
    segment = FlowSegment(
        params, x, s, config or FlowSolverConfig(), horizon=max(u, 1e-12)
    )
    mu_u = float(params.growth.eval(segment(u)))
    return mu_u / (mu_u + params.D)


def segment_growth_integral(
    params: ChemostatParams,
    x: int,
    s: float,
    length: float,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> float:
    """∫₀^length μ(φ(x, s, u)) du."""
    if length <= 0:
        return 0.0
    segment = FlowSegment(params, x, s, config, horizon=length)
    value, _ = quad(
        lambda u: float(params.growth.eval(segment(u))), 0.0, length, limit=200
    )
    return value


def dynkin_residual_psi(
    params: ChemostatParams,
    trajectory: Trajectory,
    t: float,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> float:
    """ψ(X_t) - ψ(x) - ∫₀ᵗ Lψ(X_u, S_u) du with Lψ = (μ(s) - D)x.

    A martingale in t, so its mean over paths is 0.
    """
    if not 0 <= t <= trajectory.horizon:
        raise PreconditionError(f"t must lie in [0, {trajectory.horizon}], got {t}")
    compensator = 0.0
    for start, stop, x, s in trajectory.segments(t):
        if x == 0:
            continue
        length = stop - start
        compensator += x * (
            segment_growth_integral(params, x, s, length, config) - params.D * length
        )
    return trajectory.x_at(t) - trajectory.initial.x - compensator
