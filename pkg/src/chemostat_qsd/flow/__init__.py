"""Substrate flow φ, its inverses φ̃ and φ⁻ˢ, and equilibria s̄_ℓ."""

from .equilibria import EquilibriumTable, check_count, equilibrium
from .solver import (
    DEFAULT_CONFIG,
    FlowSegment,
    FlowSolverConfig,
    Unreachable,
    flow,
    flow_table,
    initial_for,
    phit_additivity_check,
    time_to_reach,
)

__all__ = [
    "DEFAULT_CONFIG",
    "EquilibriumTable",
    "FlowSegment",
    "FlowSolverConfig",
    "Unreachable",
    "check_count",
    "equilibrium",
    "flow",
    "flow_table",
    "initial_for",
    "phit_additivity_check",
    "time_to_reach",
]
