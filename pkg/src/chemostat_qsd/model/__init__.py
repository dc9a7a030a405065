"""Growth laws, chemostat parameters and assumption checks."""

from .growth import (
    CustomLaw,
    GrowthKind,
    GrowthLaw,
    LinearLaw,
    LipschitzLaw,
    MonodLaw,
    growth_law_from_dict,
)
from .params import ChemostatParams, HybridState, ValidationReport, mu_eval, validate

__all__ = [
    "ChemostatParams",
    "CustomLaw",
    "GrowthKind",
    "GrowthLaw",
    "HybridState",
    "LinearLaw",
    "LipschitzLaw",
    "MonodLaw",
    "ValidationReport",
    "growth_law_from_dict",
    "mu_eval",
    "validate",
]
