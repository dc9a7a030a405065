"""Exception hierarchy shared by every module.

Each error class carries the process exit code the CLI reports for it.
"""

from typing import Any


class ChemostatError(Exception):
    """Base class for all chemostat-qsd errors."""

    exit_code: int = 1


class ConfigurationError(ChemostatError, ValueError):
    """Invalid parameters, configuration keys or scenario constants."""

    exit_code = 1

    def __init__(self, message: str, issues: list[str] | None = None):
        super().__init__(message)
        self.issues = issues or []


class DomainError(ConfigurationError):
    """Argument outside the domain of a function (e.g. negative substrate)."""


class PreconditionError(ConfigurationError):
    """An operation was called with inputs violating its precondition."""


class NumericError(ChemostatError, RuntimeError):
    """ODE solver or root finder failed to converge."""

    exit_code = 1

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StatisticalPowerError(ChemostatError):
    """A Monte Carlo estimate lacks the samples needed to be meaningful."""

    exit_code = 2


class InternalInvariantError(ChemostatError, AssertionError):
    """A simulation invariant was broken; results cannot be trusted."""

    exit_code = 3

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
