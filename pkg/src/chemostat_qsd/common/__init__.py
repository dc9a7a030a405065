"""Common utilities for chemostat-qsd."""

from .errors import (
    ChemostatError,
    ConfigurationError,
    DomainError,
    InternalInvariantError,
    NumericError,
    PreconditionError,
    StatisticalPowerError,
)
from .rng import RngStream, derive_seed

__all__ = [
    "ChemostatError",
    "ConfigurationError",
    "DomainError",
    "InternalInvariantError",
    "NumericError",
    "PreconditionError",
    "RngStream",
    "StatisticalPowerError",
    "derive_seed",
]
