"""Chemostat parameters, hybrid states and assumption checks."""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger

from ..common.errors import ConfigurationError, DomainError
from .growth import GrowthLaw, growth_law_from_dict

_PARAM_KEYS = {"D", "s_in", "k", "growth"}


@dataclass(frozen=True)
class ChemostatParams:
    """Dilution rate D, input concentration s_in, inverse yield k and μ."""

    D: float  # noqa: N815
    s_in: float
    k: float
    growth: GrowthLaw

    def __post_init__(self):
        for name in ("D", "s_in", "k"):
            value = getattr(self, name)
            if not isinstance(value, int | float) or not math.isfinite(value):
                raise ConfigurationError(
                    f"{name} must be a finite number, got {value!r}"
                )
            if value <= 0:
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if not isinstance(self.growth, GrowthLaw):
            raise ConfigurationError(
                f"growth must be a GrowthLaw, got {type(self.growth).__name__}"
            )

    def drift(self, ell, s):
        """Substrate velocity D(s_in - s) - kμ(s)ℓ with ℓ bacteria."""
        return self.D * (self.s_in - s) - self.k * self.growth.eval(s) * ell

    def envelope_rate(self, ell: int, s_bar_1: float) -> float:
        """max{D·s_in, kμ(s̄₁)ℓ}, the largest substrate speed on [0, s̄₁]."""
        return max(self.D * self.s_in, self.k * float(self.growth.eval(s_bar_1)) * ell)

    @classmethod
    def from_dict(cls, config: dict[str, Any]) -> "ChemostatParams":
        """Create parameters from a ``model`` config block.

        Raises:
            ConfigurationError: with one issue per missing or unknown key
        """
        issues = [f"model.{key}: missing" for key in sorted(_PARAM_KEYS - set(config))]
        issues += [
            f"model.{key}: unknown key" for key in sorted(set(config) - _PARAM_KEYS)
        ]
        for key in ("D", "s_in", "k"):
            value = config.get(key)
            if key in config and (
                not isinstance(value, int | float)
                or isinstance(value, bool)
                or value <= 0
            ):
                issues.append(f"model.{key}: must be a positive number, got {value!r}")
        if issues:
            raise ConfigurationError("invalid model block", issues=issues)

        growth_cfg = config["growth"]
        if not isinstance(growth_cfg, dict):
            raise ConfigurationError("model.growth must be a mapping")
        return cls(
            D=float(config["D"]),
            s_in=float(config["s_in"]),
            k=float(config["k"]),
            growth=growth_law_from_dict(growth_cfg),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "D": self.D,
            "s_in": self.s_in,
            "k": self.k,
            "growth": self.growth.to_dict(),
        }


@dataclass(frozen=True)
class HybridState:
    """Population count x and substrate concentration s."""

    x: int
    s: float

    def __post_init__(self):
        if isinstance(self.x, bool) or not isinstance(self.x, int | np.integer):
            raise DomainError(f"x must be an integer, got {self.x!r}")
        if self.x < 0:
            raise DomainError(f"x must be nonnegative, got {self.x}")
        if not math.isfinite(self.s) or self.s < 0:
            raise DomainError(f"s must be finite and nonnegative, got {self.s}")

    @property
    def is_extinct(self) -> bool:
        return self.x == 0


@dataclass
class ValidationReport:
    """Outcome of the standing-assumption checks on a parameter set."""

    assumption_holds: bool
    survival_hypothesis: bool
    s_bar_1: float
    mu_at_s_bar_1: float
    slope_at_s_bar_1: float
    derivative_kind: str
    p_interval: tuple[float, float] | None
    issues: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.assumption_holds and self.survival_hypothesis

    @property
    def p_max(self) -> float | None:
        return self.p_interval[1] if self.p_interval else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "assumption_holds": self.assumption_holds,
            "survival_hypothesis": self.survival_hypothesis,
            "s_bar_1": self.s_bar_1,
            "mu_at_s_bar_1": self.mu_at_s_bar_1,
            "slope_at_s_bar_1": self.slope_at_s_bar_1,
            "derivative_kind": self.derivative_kind,
            "p_interval": list(self.p_interval) if self.p_interval else None,
            "issues": self.issues,
        }


def mu_eval(params: ChemostatParams, s: float) -> float:
    """Growth rate μ(s) for s ≥ 0.

    Raises:
        DomainError: s is negative or not finite
    """
    if not math.isfinite(s) or s < 0:
        raise DomainError(f"s must be finite and nonnegative, got {s}")
    if s == 0:
        return 0.0
    return float(params.growth.eval(s))


def validate(
    params: ChemostatParams, grid_points: int = 400, fd_rel_tol: float = 1e-6
) -> ValidationReport:
    """Check μ(0) = 0 and monotonicity on a log grid, then μ(s̄₁) > D.

    The admissible exponent interval (0, (μ(s̄₁)-D)/(D + kμ'(s̄₁))) is reported
    when nonempty. Failures are recorded in ``issues``; nothing is raised.
    """
    from ..flow.equilibria import equilibrium

    law = params.growth
    issues: list[str] = []

    grid = np.logspace(-9, math.log10(10 * params.s_in), grid_points)
    values = np.asarray(law.eval(grid), dtype=float)
    slopes = np.asarray(law.deriv(grid), dtype=float) * np.ones_like(grid)

    mu_zero = float(law.eval(0.0))
    if mu_zero != 0.0:
        issues.append(f"mu(0) must be 0, got {mu_zero}")
    if not np.all(np.isfinite(values)):
        issues.append("mu is not finite on the sample grid")
    if not np.all(np.diff(values) > 0):
        first = int(np.argmin(np.diff(values) > 0))
        issues.append(f"mu is not strictly increasing near s={grid[first]:.3e}")
    if np.any(slopes < 0):
        issues.append("deriv is negative somewhere on the sample grid")

    if law.derivative_kind == "exact":
        h = 1e-5 * grid
        central = (np.asarray(law.eval(grid + h)) - np.asarray(law.eval(grid - h))) / (
            2 * h
        )
        scale = np.maximum(np.abs(central), 1e-300)
        worst = float(np.max(np.abs(slopes - central) / scale))
        if worst > fd_rel_tol:
            issues.append(
                f"deriv disagrees with central differences (relative {worst:.2e})"
            )

    assumption_holds = not issues

    s_bar_1 = equilibrium(params, 1)
    mu1 = float(law.eval(s_bar_1))
    slope1 = float(law.deriv(s_bar_1))
    survival = mu1 - params.D > 1e-9 * params.D
    if not survival:
        issues.append(f"mu(s_bar_1)={mu1:.6g} does not exceed D={params.D:.6g}")

    p_interval = None
    if survival:
        p_interval = (0.0, (mu1 - params.D) / (params.D + params.k * slope1))

    report = ValidationReport(
        assumption_holds=assumption_holds,
        survival_hypothesis=survival,
        s_bar_1=s_bar_1,
        mu_at_s_bar_1=mu1,
        slope_at_s_bar_1=slope1,
        derivative_kind=law.derivative_kind,
        p_interval=p_interval,
        issues=issues,
    )
    logger.debug(
        f"Validated params: s_bar_1={s_bar_1:.6g}, mu(s_bar_1)={mu1:.6g}, "
        f"passed={report.passed}"
    )
    return report
