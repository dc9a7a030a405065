"""Explicit probability bounds and their Monte Carlo cross-checks."""

from .birth_death import (
    BirthDeathSpec,
    EventKind,
    birth_death_first_events_mc,
    p_birth,
    p_birth_exact,
    p_death,
    p_death_exact,
)
from .hitting import (
    HittingBoundReport,
    HittingConstants,
    HittingScenario,
    c1_reach,
    c3_reach_point,
    c_stay,
    hitting_constants,
    hitting_lower_bound,
)
from .moments import (
    ExpMomentReport,
    exp_moment_check,
    inv_substrate_moment_bound,
    inv_substrate_rhs,
)
from .small_set import (
    SmallSetResult,
    choose_small_set_points,
    restrict_small_set,
    small_set_constant,
    small_set_mc_check,
)

__all__ = [
    "BirthDeathSpec",
    "EventKind",
    "ExpMomentReport",
    "HittingBoundReport",
    "HittingConstants",
    "HittingScenario",
    "SmallSetResult",
    "birth_death_first_events_mc",
    "c1_reach",
    "c3_reach_point",
    "c_stay",
    "choose_small_set_points",
    "exp_moment_check",
    "hitting_constants",
    "hitting_lower_bound",
    "inv_substrate_moment_bound",
    "inv_substrate_rhs",
    "p_birth",
    "p_birth_exact",
    "p_death",
    "p_death_exact",
    "restrict_small_set",
    "small_set_constant",
    "small_set_mc_check",
]
