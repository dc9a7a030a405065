"""Check framework for Monte Carlo cross-checks."""

from .base import BaseCheck, CheckReport, CheckResult
from .statistical import (
    ExponentialKSCheck,
    MeanBoundCheck,
    ProportionCheck,
    ToleranceCheck,
)

__all__ = [
    "BaseCheck",
    "CheckReport",
    "CheckResult",
    "ExponentialKSCheck",
    "MeanBoundCheck",
    "ProportionCheck",
    "ToleranceCheck",
]
