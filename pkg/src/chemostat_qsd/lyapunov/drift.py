"""Grid certificates for the drift inequalities LV ≤ -ηV + ζψ and Lg ≤ -(C+D)g.

The certificates are numerical evidence on a finite grid, refined
geometrically towards the singular edges s → 0 and s → s̄₁.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np
from loguru import logger

from ..common.errors import ConfigurationError
from ..flow.equilibria import equilibrium
from ..model.params import ChemostatParams, validate
from .functions import g_function, v_function
from .generator import generator_apply

THETA_SAFETY = 1.1


@dataclass(frozen=True)
class LyapunovConfig:
    """Constants of V and of its drift inequality."""

    rho: float
    p: float
    alpha: float
    theta: float
    eta: float
    zeta: float | None
    s_bar_1: float

    def __post_init__(self):
        if not self.rho > 1:
            raise ConfigurationError(f"rho must exceed 1, got {self.rho}")
        if not self.p > 0:
            raise ConfigurationError(f"p must be positive, got {self.p}")
        if self.zeta is not None and self.zeta < 0:
            raise ConfigurationError(f"zeta must be nonnegative, got {self.zeta}")
        if not self.s_bar_1 > 0:
            raise ConfigurationError(f"s_bar_1 must be positive, got {self.s_bar_1}")

    def check(self, params: ChemostatParams) -> None:
        """Check the constraints that involve the model parameters.

        Raises:
            ConfigurationError: one issue per violated constraint
        """
        report = validate(params)
        issues = []
        if abs(self.s_bar_1 - report.s_bar_1) > 1e-9 * report.s_bar_1:
            issues.append(
                f"s_bar_1={self.s_bar_1} does not match the model ({report.s_bar_1})"
            )
        if report.p_max is None or not self.p < report.p_max:
            issues.append(f"p={self.p} outside the admissible interval")
        if self.alpha < (self.rho - 1) / params.k:
            issues.append(f"alpha must be >= (rho-1)/k = {(self.rho - 1) / params.k}")
        threshold = theta_threshold(params, self.p, report)
        if not self.theta > threshold:
            issues.append(f"theta must exceed {threshold:.6g}, got {self.theta}")
        if not self.eta > params.D:
            issues.append(f"eta must exceed D={params.D}, got {self.eta}")
        if issues:
            raise ConfigurationError("invalid Lyapunov constants", issues=issues)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DriftGrid:
    """x ∈ {1..x_max}; s-points over [lo_frac·s̄₁, (1-hi_frac)·s̄₁].

    Half the points are uniform, the rest cluster geometrically at both edges.
    """

    x_max: int = 50
    s_points: int = 2000
    lo_frac: float = 1e-4
    hi_frac: float = 1e-4

    def __post_init__(self):
        if self.x_max < 1 or self.s_points < 8:
            raise ConfigurationError("grid needs x_max >= 1 and s_points >= 8")
        if not (0 < self.lo_frac < 0.5 and 0 < self.hi_frac < 0.5):
            raise ConfigurationError("lo_frac and hi_frac must lie in (0, 0.5)")

    def s_values(self, s_bar_1: float) -> np.ndarray:
        lo, hi = self.lo_frac * s_bar_1, (1.0 - self.hi_frac) * s_bar_1
        quarter = self.s_points // 4
        uniform = np.linspace(lo, hi, self.s_points - 2 * quarter)
        near_zero = np.geomspace(lo, 0.5 * s_bar_1, quarter)
        near_top = s_bar_1 - np.geomspace(
            self.hi_frac * s_bar_1, 0.5 * s_bar_1, quarter
        )
        return np.unique(np.concatenate([uniform, near_zero, near_top]))

    def x_values(self) -> range:
        return range(1, self.x_max + 1)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class DriftCertificate:
    """Worst margin of LV + ηV - ζψ over the grid; passed iff it is ≤ 0."""

    config: LyapunovConfig
    grid: dict[str, Any]
    worst_margin: float
    worst_point: tuple[int, float]
    row_worst: list[dict[str, float]]
    boundary_margins: dict[str, float]
    zeta_fitted: bool = False

    @property
    def passed(self) -> bool:
        return self.worst_margin <= 0

    def row(self, x: int) -> dict[str, float]:
        return self.row_worst[x - 1]

    def zeta_t(self, params: ChemostatParams, t: float) -> float:
        return zeta_t(self.config, params, t)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "config": self.config.to_dict(),
            "grid": self.grid,
            "worst_margin": self.worst_margin,
            "worst_point": {"x": self.worst_point[0], "s": self.worst_point[1]},
            "boundary_margins": self.boundary_margins,
            "zeta_fitted": self.zeta_fitted,
            "row_worst": self.row_worst,
        }


def theta_threshold(params: ChemostatParams, p: float, report=None) -> float:
    """a/(μ(s̄₁) - a) with a = p(D + kμ'(s̄₁)) + D."""
    report = report or validate(params)
    a = p * (params.D + params.k * report.slope_at_s_bar_1) + params.D
    if not report.mu_at_s_bar_1 > a:
        raise ConfigurationError(
            f"no admissible theta: mu(s_bar_1)={report.mu_at_s_bar_1:.6g} "
            f"does not exceed p(D + k mu'(s_bar_1)) + D = {a:.6g}"
        )
    return a / (report.mu_at_s_bar_1 - a)


def zeta_t(config: LyapunovConfig, params: ChemostatParams, t: float) -> float:
    """ζ e^{(μ(s̄₁)-D)t}/(η - D)."""
    mu1 = float(params.growth.eval(config.s_bar_1))
    return config.zeta * math.exp((mu1 - params.D) * t) / (config.eta - params.D)


def blf2_sandwich(params: ChemostatParams, x: int, t: float) -> tuple[float, float]:
    """e^{-Dt}x ≤ E[X_t] ≤ e^{(μ(s̄₁)-D)t}x for starts below s̄₁."""
    mu1 = float(params.growth.eval(equilibrium(params, 1)))
    return math.exp(-params.D * t) * x, math.exp((mu1 - params.D) * t) * x


def _drift_rows(params, config, grid):
    v = v_function(config)
    s = grid.s_values(config.s_bar_1)
    for x in grid.x_values():
        yield x, s, generator_apply(params, v, x, s) + config.eta * v(x, s)


def verify_drift(
    params: ChemostatParams,
    config: LyapunovConfig,
    grid: DriftGrid | None = None,
    fit_zeta: bool = False,
) -> DriftCertificate:
    """Evaluate LV + ηV - ζψ on the grid.

    With ``fit_zeta`` (or when config.zeta is None) ζ is replaced by
    max(0, max over the grid of LV + ηV) before the margins are taken.
    """
    grid = grid or DriftGrid()
    rows = list(_drift_rows(params, config, grid))

    fitted = fit_zeta or config.zeta is None
    if fitted:
        peak = max(float(np.max(values)) for _, _, values in rows)
        config = replace(config, zeta=max(0.0, peak))

    row_worst = []
    worst = (-math.inf, 0, 0.0)
    low_edge = high_edge = -math.inf
    for x, s, values in rows:
        margin = values - config.zeta * x
        i = int(np.argmax(margin))
        row_worst.append({"x": x, "s": float(s[i]), "margin": float(margin[i])})
        if margin[i] > worst[0]:
            worst = (float(margin[i]), x, float(s[i]))
        low_edge = max(low_edge, float(margin[0]))
        high_edge = max(high_edge, float(margin[-1]))

    certificate = DriftCertificate(
        config=config,
        grid=grid.to_dict(),
        worst_margin=worst[0],
        worst_point=(worst[1], worst[2]),
        row_worst=row_worst,
        boundary_margins={"s_low": low_edge, "s_high": high_edge},
        zeta_fitted=fitted,
    )
    logger.info(
        f"Drift certificate: passed={certificate.passed}, "
        f"worst margin {worst[0]:.4g} at x={worst[1]}, s={worst[2]:.6g}, "
        f"zeta={config.zeta:.6g}"
    )
    return certificate


def select_parameters(
    params: ChemostatParams,
    rho: float,
    p: float,
    grid: DriftGrid | None = None,
    theta_safety: float = THETA_SAFETY,
) -> LyapunovConfig:
    """Choose α, θ, η from (ρ, p) and fit ζ on the grid.

    Raises:
        ConfigurationError: params fail validation, p is outside its
            interval, or the θ interval is empty
    """
    report = validate(params)
    if not report.passed:
        raise ConfigurationError("model fails validation", issues=report.issues)
    if not 0 < p < report.p_max:
        raise ConfigurationError(
            f"p={p} outside the admissible interval (0, {report.p_max:.6g})"
        )
    if not rho > 1:
        raise ConfigurationError(f"rho must exceed 1, got {rho}")

    a = p * (params.D + params.k * report.slope_at_s_bar_1) + params.D
    theta = theta_safety * theta_threshold(params, p, report)
    mu1 = report.mu_at_s_bar_1
    eta = params.D + 0.5 * (theta * mu1 / (1.0 + theta) - a)
    config = LyapunovConfig(
        rho=rho,
        p=p,
        alpha=(rho - 1.0) / params.k,
        theta=theta,
        eta=eta,
        zeta=None,
        s_bar_1=report.s_bar_1,
    )
    return verify_drift(params, config, grid, fit_zeta=True).config


@dataclass(frozen=True)
class GConstants:
    """Constants of g and the rates they certify."""

    eps: float
    eps_bar: float
    beta: float
    delta0: float
    delta1: float
    c1: float
    c2: float
    scan: list[dict[str, float]] = field(default_factory=list, compare=False)

    @property
    def rate(self) -> float:
        """C = -max(C₁, C₂)."""
        return -max(self.c1, self.c2)

    @property
    def amplitude(self) -> float:
        """A = (1 + δ₁)/min(1, δ₀)."""
        return (1.0 + self.delta1) / min(1.0, self.delta0)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out.update(rate=self.rate, amplitude=self.amplitude)
        return out


def _c1(params, s_bar_1, eps_bar, beta, delta1) -> float:
    s = s_bar_1 - eps_bar
    mu = float(params.growth.eval(s))
    speed = params.D * (params.s_in - s) - 2 * params.k * mu
    return speed * beta + params.D * (1.0 + 2.0 * delta1)


def _c2_without_delta0(params, s_bar_1, eps, beta, delta1) -> float:
    s = s_bar_1 - eps
    mu = float(params.growth.eval(s))
    speed = params.D * (params.s_in - s) - params.k * mu
    return speed * beta - mu * delta1 / (1.0 + delta1)


def c_rates(params, eps, eps_bar, beta, delta0, delta1) -> tuple[float, float]:
    """(C₁, C₂): upper bounds of Lg/g + D on the x ≥ 2 and x = 1 rows."""
    s_bar_1 = equilibrium(params, 1)
    c1 = _c1(params, s_bar_1, eps_bar, beta, delta1)
    c2 = _c2_without_delta0(params, s_bar_1, eps, beta, delta1)
    c2 += params.D * delta0 / (1.0 + delta1)
    return c1, c2


def select_g_constants(
    params: ChemostatParams,
    delta1: float = 1.0,
    eps_bar_fraction: float = 0.5,
    max_halvings: int = 60,
) -> GConstants:
    """Construct (ε̄, β, ε, δ₀) so that both C₁ and C₂ are negative.

    ε̄ is a fraction of s̄₁ - s̄₂; β makes C₁ = -D(1 + 2δ₁); ε is halved
    until the x = 1 row has a margin; δ₀ then takes half of that margin.

    Raises:
        ConfigurationError: the ε scan exhausts without a negative C₂
    """
    if not delta1 > 0:
        raise ConfigurationError(f"delta1 must be positive, got {delta1}")
    if not 0 < eps_bar_fraction < 1:
        raise ConfigurationError("eps_bar_fraction must lie in (0, 1)")
    s_bar_1, s_bar_2 = equilibrium(params, 1), equilibrium(params, 2)
    eps_bar = eps_bar_fraction * (s_bar_1 - s_bar_2)

    s = s_bar_1 - eps_bar
    speed2 = params.D * (params.s_in - s) - 2 * params.k * float(params.growth.eval(s))
    beta = 2.0 * params.D * (1.0 + 2.0 * delta1) / -speed2
    mu1 = float(params.growth.eval(s_bar_1))
    target = -0.5 * mu1 * delta1 / (1.0 + delta1)

    scan = []
    eps = eps_bar
    for _ in range(max_halvings):
        b = _c2_without_delta0(params, s_bar_1, eps, beta, delta1)
        scan.append({"eps": eps, "beta": beta, "c2_without_delta0": b})
        if b <= target:
            break
        eps /= 2
    else:
        raise ConfigurationError(
            "no admissible (beta, eps) found in scan",
            issues=[
                f"eps={row['eps']:.3e}: "
                f"C2 before delta0 = {row['c2_without_delta0']:.4g}"
                for row in scan[-5:]
            ],
        )

    delta0 = -b * (1.0 + delta1) / (2.0 * params.D)
    c1, c2 = c_rates(params, eps, eps_bar, beta, delta0, delta1)
    constants = GConstants(eps, eps_bar, beta, delta0, delta1, c1, c2, scan)
    logger.info(
        f"g constants: eps={eps:.4g}, beta={beta:.4g}, delta0={delta0:.4g}, "
        f"C={constants.rate:.4g}"
    )
    return constants


@dataclass
class GDriftCertificate:
    """Grid check of Lg/g + D ≤ -C on ℕ* × [s̄₁ - ε, 3 s_in]."""

    constants: GConstants
    worst_margin: float
    worst_point: tuple[int, float]
    x_max: int
    s_range: tuple[float, float]
    s_points: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_margin <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "constants": self.constants.to_dict(),
            "worst_margin": self.worst_margin,
            "worst_point": {"x": self.worst_point[0], "s": self.worst_point[1]},
            "grid": {
                "x_max": self.x_max,
                "s_range": list(self.s_range),
                "s_points": self.s_points,
            },
            "tolerance": self.tolerance,
        }


def g_drift_check(
    params: ChemostatParams,
    eps: float,
    beta: float,
    delta0: float,
    delta1: float,
    eps_bar: float | None = None,
    x_max: int = 50,
    s_points: int = 2000,
) -> tuple[float, GDriftCertificate]:
    """Certify Lg ≤ -(C + D)g on the grid and return C = -max(C₁, C₂).

    Raises:
        ConfigurationError: ε is outside (0, ε̄] ⊂ (0, s̄₁ - s̄₂), a constant
            is not positive, or the constants give no positive C
    """
    s_bar_1, s_bar_2 = equilibrium(params, 1), equilibrium(params, 2)
    eps_bar = eps if eps_bar is None else eps_bar
    issues = []
    if not 0 < eps <= eps_bar < s_bar_1 - s_bar_2:
        issues.append(
            f"need 0 < eps <= eps_bar < s_bar_1 - s_bar_2 = {s_bar_1 - s_bar_2:.6g}"
        )
    for name, value in (("beta", beta), ("delta0", delta0), ("delta1", delta1)):
        if not value > 0:
            issues.append(f"{name} must be positive, got {value}")
    if issues:
        raise ConfigurationError("invalid g constants", issues=issues)

    c1, c2 = c_rates(params, eps, eps_bar, beta, delta0, delta1)
    constants = GConstants(eps, eps_bar, beta, delta0, delta1, c1, c2)
    rate = constants.rate
    if not rate > 0:
        raise ConfigurationError(
            "g constants give no positive rate",
            issues=[f"C1={c1:.6g}", f"C2={c2:.6g}"],
        )

    g = g_function(beta, delta0, delta1)
    s = np.linspace(s_bar_1 - eps, 3 * params.s_in, s_points)
    worst = (-math.inf, 0, 0.0)
    for x in range(1, x_max + 1):
        margin = generator_apply(params, g, x, s) / g(x, s) + params.D + rate
        i = int(np.argmax(margin))
        if margin[i] > worst[0]:
            worst = (float(margin[i]), x, float(s[i]))

    certificate = GDriftCertificate(
        constants=constants,
        worst_margin=worst[0],
        worst_point=(worst[1], worst[2]),
        x_max=x_max,
        s_range=(float(s[0]), float(s[-1])),
        s_points=s_points,
        tolerance=1e-9 * max(1.0, abs(rate) + params.D),
    )
    logger.info(
        f"g drift: C={rate:.6g}, worst margin {worst[0]:.3e} "
        f"at x={worst[1]}, s={worst[2]:.6g}"
    )
    return rate, certificate


def tail_bound(  # noqa: N803
    C: float, A: float, beta: float, s: float, t: float, D: float
) -> float:
    """A e^{βs} e^{-(D+C)t}, the bound on P(T_ε ∧ T_Ext > t)."""
    return A * math.exp(beta * s - (D + C) * t)

