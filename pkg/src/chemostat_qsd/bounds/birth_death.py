"""Probabilities that the first ℓ events of a linear birth-death process are
all deaths (P_d) or all births (P_b) and happen by time t.

``p_death``/``p_birth`` evaluate the nested integrals level by level with
adaptive quadrature; ``p_death_exact``/``p_birth_exact`` use uniformization of
the equivalent absorbing chain, whose terms are all nonnegative.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.integrate import quad

from ..common.errors import ConfigurationError, PreconditionError

MAX_DEPTH = 8
QUAD_RTOL = 1e-10


class EventKind(Enum):
    DEATH = "death"
    BIRTH = "birth"


@dataclass(frozen=True)
class BirthDeathSpec:
    """Per-capita birth rate μ̄ and death rate D."""

    birth_rate: float
    death_rate: float

    def __post_init__(self):
        if not (self.birth_rate > 0 and self.death_rate > 0):
            raise ConfigurationError(
                f"rates must be positive, got birth={self.birth_rate}, "
                f"death={self.death_rate}"
            )

    @property
    def total_rate(self) -> float:
        return self.birth_rate + self.death_rate

    @classmethod
    def for_params(cls, params, s_bar_1: float) -> "BirthDeathSpec":
        """μ̄ = μ(s̄₁), D = dilution rate."""
        return cls(float(params.growth.eval(s_bar_1)), params.D)

    def steps(
        self, kind: EventKind, n: int, ell: int
    ) -> tuple[tuple[float, float], ...]:
        """(rate of the wanted event, total rate) for each of the ℓ events."""
        if kind is EventKind.DEATH:
            sizes = [n - i for i in range(ell)]
            per_capita = self.death_rate
        else:
            sizes = [n + i for i in range(ell)]
            per_capita = self.birth_rate
        return tuple((per_capita * m, self.total_rate * m) for m in sizes)


def _check(n: int, ell: int, t: float, kind: EventKind) -> None:
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    if ell < 0:
        raise PreconditionError(f"ell must be >= 0, got {ell}")
    if kind is EventKind.DEATH and ell > n:
        raise PreconditionError(f"cannot have {ell} deaths starting from {n}")
    if t < 0:
        raise PreconditionError(f"t must be nonnegative, got {t}")


@lru_cache(maxsize=200_000)
def _nested(steps: tuple[tuple[float, float], ...], remaining: float) -> float:
    if not steps:
        return 1.0
    if remaining <= 0:
        return 0.0
    (rate, total), rest = steps[0], steps[1:]
    if not rest:
        return rate / total * -math.expm1(-total * remaining)
    value, _ = quad(
        lambda v: rate * math.exp(-total * v) * _nested(rest, remaining - v),
        0.0,
        remaining,
        epsabs=0.0,
        epsrel=QUAD_RTOL,
        limit=200,
    )
    return value


def _first_events_quad(
    spec: BirthDeathSpec, kind: EventKind, n: int, ell: int, t: float
) -> float:
    _check(n, ell, t, kind)
    if ell > MAX_DEPTH:
        raise PreconditionError(
            f"quadrature depth {ell} exceeds {MAX_DEPTH}; use the exact oracle"
        )
    return _nested(spec.steps(kind, n, ell), float(t))


def p_death(spec: BirthDeathSpec, n: int, ell: int, t: float) -> float:
    """P_d(n, ℓ, t): the first ℓ events from n individuals are deaths, all by t."""
    return _first_events_quad(spec, EventKind.DEATH, n, ell, t)


def p_birth(spec: BirthDeathSpec, n: int, ell: int, t: float) -> float:
    """P_b(n, ℓ, t): the first ℓ events from n individuals are births, all by t."""
    return _first_events_quad(spec, EventKind.BIRTH, n, ell, t)


def _absorbed_by(rates: list[float], t: float, tail: float = 1e-17) -> float:
    """P(Exp(rates[0]) + ... + Exp(rates[-1]) ≤ t) by uniformization."""
    ell = len(rates)
    if ell == 0:
        return 1.0
    if t <= 0:
        return 0.0
    uniform = max(rates)
    jump = np.array(rates) / uniform
    occupancy = np.zeros(ell + 1)
    occupancy[0] = 1.0
    mean = uniform * t
    n_max = int(mean + 12 * math.sqrt(mean) + 12 * ell + 50)
    weights = stats.poisson.pmf(np.arange(n_max + 1), mean)
    total = 0.0
    for n in range(n_max + 1):
        total += weights[n] * occupancy[ell]
        moved = occupancy[:ell] * jump
        occupancy[:ell] -= moved
        occupancy[1:] += moved
        if n > mean and weights[n] < tail * max(total, 1e-300):
            break
    return float(min(total, 1.0))


def _first_events_exact(spec, kind, n, ell, t) -> float:
    _check(n, ell, t, kind)
    steps = spec.steps(kind, n, ell)
    choice = math.prod(rate / total for rate, total in steps)
    return choice * _absorbed_by([total for _, total in steps], float(t))


def p_death_exact(spec: BirthDeathSpec, n: int, ell: int, t: float) -> float:
    return _first_events_exact(spec, EventKind.DEATH, n, ell, t)


def p_birth_exact(spec: BirthDeathSpec, n: int, ell: int, t: float) -> float:
    return _first_events_exact(spec, EventKind.BIRTH, n, ell, t)


def birth_death_first_events_mc(
    spec: BirthDeathSpec,
    n: int,
    ell: int,
    t: float,
    kind: EventKind | str,
    n_paths: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Frequency (and its standard error) of "first ℓ events are ``kind``, all by t"."""
    kind = EventKind(kind)
    _check(n, ell, t, kind)
    elapsed = np.zeros(n_paths)
    ok = np.ones(n_paths, dtype=bool)
    for rate, total in spec.steps(kind, n, ell):
        elapsed += rng.exponential(1.0 / total, size=n_paths)
        ok &= rng.random(n_paths) < rate / total
    ok &= elapsed <= t
    p = float(ok.mean())
    return p, math.sqrt(max(p * (1 - p), 1.0 / n_paths) / n_paths)
