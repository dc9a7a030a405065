"""Pathwise domination of the population by a Yule process.

Z gives birth at rate μ̄·Z and never dies. A Z-birth is also a division of X
with probability X·μ(S)/(Z·μ̄), so X divides at rate μ(S)·X as required and
X ≤ Z holds on every path as long as μ(S) ≤ μ̄.
"""

from dataclasses import dataclass, field

import numpy as np

from ..common.errors import InternalInvariantError, PreconditionError
from ..flow.equilibria import check_count
from ..flow.solver import FlowSegment, FlowSolverConfig
from ..model.params import ChemostatParams
from .engine import SIMULATION_CONFIG

_BOUND_SLACK = 1e-9


@dataclass
class CoupledPath:
    """Jump times of the coupled pair with the values after each jump."""

    x0: int
    s0: float
    birth_rate: float
    horizon: float
    times: list[float] = field(default_factory=list)
    x_values: list[int] = field(default_factory=list)
    z_values: list[int] = field(default_factory=list)
    final_x: int = 0
    final_z: int = 0
    final_s: float = 0.0

    @property
    def dominated(self) -> bool:
        return all(x <= z for x, z in zip(self.x_values, self.z_values, strict=True))


def simulate_yule_coupled(
    params: ChemostatParams,
    x: int,
    s: float,
    horizon: float,
    birth_rate: float,
    rng: np.random.Generator,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> CoupledPath:
    """Simulate (X, S) together with a dominating Yule process Z, Z₀ = x.

    Args:
        params: Chemostat parameters
        x: Initial population
        s: Initial substrate
        horizon: Simulation length
        birth_rate: μ̄, must dominate μ(S_u) on [0, horizon]
        rng: Random generator

    Raises:
        InternalInvariantError: μ(S_u) > μ̄ at some jump candidate, or X > Z
    """
    x = check_count(x, "x", minimum=1)
    if not birth_rate > 0:
        raise PreconditionError(f"birth_rate must be positive, got {birth_rate}")

    path = CoupledPath(x0=x, s0=s, birth_rate=birth_rate, horizon=horizon)
    t, pop, yule, sub = 0.0, x, x, float(s)
    while True:
        total = birth_rate * yule + params.D * pop
        wait = rng.exponential(1.0 / total)
        if t + wait >= horizon:
            remaining = horizon - t
            if remaining > 0:
                segment = FlowSegment(params, pop, sub, config, horizon=remaining)
                sub = segment(remaining)
            break
        sub = FlowSegment(params, pop, sub, config, horizon=wait)(wait)
        t += wait
        mark = rng.random() * total
        if mark < params.D * pop:
            pop -= 1
        elif pop == 0:
            yule += 1
        else:
            yule += 1
            mu = float(params.growth.eval(sub))
            if mu > birth_rate * (1 + _BOUND_SLACK):
                raise InternalInvariantError(
                    "Yule birth rate does not dominate the growth rate",
                    diagnostics={"mu": mu, "birth_rate": birth_rate, "s": sub, "t": t},
                )
            # yule was incremented, so the ratio uses the pre-birth size
            if rng.random() * (yule - 1) * birth_rate < pop * mu:
                pop += 1
        if pop > yule:
            raise InternalInvariantError(
                "coupled population exceeds Yule process",
                diagnostics={"x": pop, "z": yule, "t": t},
            )
        path.times.append(t)
        path.x_values.append(pop)
        path.z_values.append(yule)

    path.final_x, path.final_z, path.final_s = pop, yule, sub
    return path
