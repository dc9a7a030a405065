"""Fleming-Viot particle approximation of the conditioned dynamics.

Particles move independently by thinning. When one dies it jumps onto the
current state of another particle chosen uniformly. Events are processed in
time order through a heap, so the run is deterministic given the seed.
"""

import heapq
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from scipy import stats

from ..common.errors import InternalInvariantError, PreconditionError
from ..common.rng import RngStream
from ..flow.equilibria import equilibrium
from ..flow.solver import FlowSolverConfig, flow
from ..model.params import ChemostatParams, HybridState
from ..simulate.engine import SIMULATION_CONFIG, default_rate_bound, step
from .estimators import BOUNDARY_FLAG, LambdaEstimate, LambdaMethod
from .histogram import DEFAULT_S_BINS, Binning, QsdEstimate

MIN_PARTICLES = 100
DEFAULT_SNAPSHOTS = 20


@dataclass
class ParticleEnsemble:
    """N live particles at a common time."""

    particles: list[HybridState]
    time: float = 0.0
    resample_count: int = 0
    kill_times: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.particles:
            raise PreconditionError("ensemble needs at least one particle")
        dead = [i for i, p in enumerate(self.particles) if p.x < 1]
        if dead:
            raise PreconditionError(f"particles {dead[:5]} have x = 0")

    @property
    def n(self) -> int:
        return len(self.particles)

    @classmethod
    def at_point(cls, x: int, s: float, n: int) -> "ParticleEnsemble":
        return cls([HybridState(x, float(s)) for _ in range(n)])

    @classmethod
    def from_estimate(
        cls, estimate: QsdEstimate, n: int, rng: np.random.Generator
    ) -> "ParticleEnsemble":
        xs, ss = estimate.draw(n, rng)
        return cls(
            [HybridState(int(x), float(s)) for x, s in zip(xs, ss, strict=True)],
            time=estimate.time,
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([p.x for p in self.particles], dtype=int),
            np.array([p.s for p in self.particles], dtype=float),
        )

    def to_rows(self) -> list[dict[str, Any]]:
        return [
            {"particle": i, "x": p.x, "s": p.s} for i, p in enumerate(self.particles)
        ]


class _Particle:
    __slots__ = ("anchor_time", "x", "s", "rng", "pending")

    def __init__(self, state: HybridState, time: float, rng: np.random.Generator):
        self.anchor_time = time
        self.x = state.x
        self.s = state.s
        self.rng = rng
        self.pending = None

    def state_at(self, params, time: float, config) -> HybridState:
        if time == self.anchor_time:
            return HybridState(self.x, self.s)
        s = flow(params, self.x, self.s, time - self.anchor_time, config)
        return HybridState(self.x, max(s, 0.0))


def _kill_rate(kills: int, n: int, span: float, window) -> LambdaEstimate:
    """Kill count over n·span with a Garwood (exact Poisson) interval."""
    exposure = n * span
    low = stats.chi2.ppf(0.025, 2 * kills) / 2 if kills else 0.0
    high = stats.chi2.ppf(0.975, 2 * kills + 2) / 2
    return LambdaEstimate(
        lambda_hat=kills / exposure,
        ci_low=low / exposure,
        ci_high=high / exposure,
        method=LambdaMethod.FLEMING_VIOT_KILL_RATE,
        window=window,
        details={"kills": kills, "particles": n},
    )


def evolve_fleming_viot(
    params: ChemostatParams,
    ensemble: ParticleEnsemble,
    t: float,
    master_seed: int,
    snapshots: int = DEFAULT_SNAPSHOTS,
    binning: Binning | None = None,
    s_bins: int = DEFAULT_S_BINS,
    min_particles: int = MIN_PARTICLES,
    config: FlowSolverConfig = SIMULATION_CONFIG,
) -> tuple[ParticleEnsemble, QsdEstimate, LambdaEstimate]:
    """Run the ensemble for time t.

    The first half of the run is burn-in. λ̂ is the kill count in the second
    half over N times its length; the histogram pools ``snapshots`` equally
    spaced ensemble snapshots from the second half, the last at the final time.

    Raises:
        PreconditionError: fewer than ``min_particles`` particles, N = 1, or
            t not positive
    """
    n = ensemble.n
    if n < 2:
        raise PreconditionError("Fleming-Viot needs at least two particles")
    if n < min_particles:
        raise PreconditionError(f"Fleming-Viot needs N >= {min_particles}, got {n}")
    if not t > 0:
        raise PreconditionError(f"t must be positive, got {t}")

    stream = RngStream(master_seed)
    resampler = stream.child(0).generator()
    t0, t_end = ensemble.time, ensemble.time + t
    burn_in = t0 + 0.5 * t
    particles = [
        _Particle(state, t0, stream.child(i + 1).generator())
        for i, state in enumerate(ensemble.particles)
    ]
    flags = [BOUNDARY_FLAG] if any(p.s == 0 for p in ensemble.particles) else []

    queue: list[tuple[float, int]] = []

    def schedule(i: int) -> None:
        particle = particles[i]
        result = step(
            params,
            HybridState(particle.x, particle.s),
            default_rate_bound(params, particle.s),
            particle.rng,
            t_end - particle.anchor_time,
            config,
        )
        particle.pending = result
        if result.event is not None:
            heapq.heappush(queue, (particle.anchor_time + result.elapsed, i))

    for i in range(n):
        schedule(i)

    snapshot_times = list(np.linspace(burn_in, t_end, max(snapshots, 1)))
    pooled_x: list[int] = []
    pooled_s: list[float] = []

    def take_snapshot(time: float) -> None:
        for particle in particles:
            state = particle.state_at(params, time, config)
            pooled_x.append(state.x)
            pooled_s.append(state.s)

    kills, resamples = [], ensemble.resample_count
    while queue:
        time, i = heapq.heappop(queue)
        while snapshot_times and snapshot_times[0] < time:
            take_snapshot(snapshot_times.pop(0))
        particle = particles[i]
        event = particle.pending.event
        if event.x_after == 0:
            if n == 1:
                raise InternalInvariantError("all particles extinct")
            j = int(resampler.integers(n - 1))
            j += j >= i
            donor = particles[j].state_at(params, time, config)
            particle.x, particle.s = donor.x, donor.s
            resamples += 1
            kills.append(time)
        else:
            particle.x, particle.s = event.x_after, particle.pending.s_end
        particle.anchor_time = time
        schedule(i)

    for time in snapshot_times:
        take_snapshot(time)

    final = ParticleEnsemble(
        [particle.state_at(params, t_end, config) for particle in particles],
        time=t_end,
        resample_count=resamples,
        kill_times=ensemble.kill_times + kills,
    )
    late_kills = sum(1 for time in kills if time >= burn_in)
    lam = _kill_rate(late_kills, n, t_end - burn_in, (burn_in, t_end))

    s_bar_1 = equilibrium(params, 1)
    binning = binning or Binning.fit(np.array(pooled_x), s_bar_1, s_bins)
    estimate = QsdEstimate.from_samples(
        pooled_x, pooled_s, binning, t_end, "fleming_viot", flags
    )
    logger.info(
        f"Fleming-Viot N={n} to t={t_end:g}: {len(kills)} resamples, "
        f"lambda {lam.lambda_hat:.4g} [{lam.ci_low:.4g}, {lam.ci_high:.4g}]"
    )
    if math.isclose(lam.lambda_hat, 0.0):
        logger.warning(
            "No kills after burn-in; the kill-rate estimate is uninformative"
        )
    return final, estimate, lam
