"""Deterministic substrate flow between jumps and its two inverses.

``flow`` integrates S' = D(s_in - S) - kμ(S)ℓ with RK45. ``time_to_reach``
inverts it in t (returning an ``Unreachable`` infinity when the target is not
on the way to s̄_ℓ) and ``initial_for`` inverts it in the initial condition.
"""

import bisect
import math
from dataclasses import dataclass, replace

import numpy as np
from loguru import logger
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ..common.errors import ConfigurationError, NumericError, PreconditionError
from ..model.params import ChemostatParams
from .equilibria import DEFAULT_ROOT_TOL, ROOT_RTOL, check_count, equilibrium


@dataclass(frozen=True)
class FlowSolverConfig:
    """Integrator and root-finding tolerances."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_step: float = math.inf
    root_tol: float = DEFAULT_ROOT_TOL

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "max_step", "root_tol"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(f"{name} must be positive, got {value}")

    @classmethod
    def for_verification(cls) -> "FlowSolverConfig":
        """Tolerances under which composed operations agree to 1e-8."""
        return cls()

    @classmethod
    def for_simulation(cls) -> "FlowSolverConfig":
        """Looser integration for Monte Carlo segments.

        Trades last-digit accuracy of S between jumps for throughput.
        """
        return cls(abs_tol=1e-10, rel_tol=1e-8)

    @classmethod
    def from_dict(cls, config: dict) -> "FlowSolverConfig":
        unknown = set(config) - {"abs_tol", "rel_tol", "max_step", "root_tol"}
        if unknown:
            raise ConfigurationError(
                "invalid solver block",
                issues=[f"solver.{key}: unknown key" for key in sorted(unknown)],
            )
        return replace(cls(), **{key: float(value) for key, value in config.items()})

    def to_dict(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_step": self.max_step,
            "root_tol": self.root_tol,
        }


DEFAULT_CONFIG = FlowSolverConfig()


class Unreachable(float):
    """+∞ time tagged with the reason the target cannot be reached."""

    near_equilibrium: bool

    def __new__(cls, near_equilibrium: bool = False):
        value = super().__new__(cls, math.inf)
        value.near_equilibrium = near_equilibrium
        return value

    def __repr__(self) -> str:
        return f"Unreachable(near_equilibrium={self.near_equilibrium})"


def _check_concentration(value: float, name: str) -> float:
    if not math.isfinite(value) or value < 0:
        raise PreconditionError(f"{name} must be finite and nonnegative, got {value}")
    return float(value)


def _integrate(
    params: ChemostatParams,
    ell: int,
    s0: float,
    t_end: float,
    config: FlowSolverConfig,
    dense: bool,
):
    sol = solve_ivp(
        lambda _t, y: params.drift(ell, y),
        (0.0, t_end),
        [s0],
        method="RK45",
        rtol=config.rel_tol,
        atol=config.abs_tol,
        max_step=config.max_step,
        dense_output=dense,
    )
    if not sol.success:
        raise NumericError(
            f"flow integration failed: {sol.message}",
            diagnostics={
                "ell": ell,
                "s0": s0,
                "t_end": t_end,
                "status": sol.status,
                "nfev": sol.nfev,
            },
        )
    return sol


def flow(
    params: ChemostatParams,
    ell: int,
    s0: float,
    t: float,
    config: FlowSolverConfig = DEFAULT_CONFIG,
) -> float:
    """φ(ℓ, s₀, t): substrate after time t with ℓ bacteria held fixed."""
    ell = check_count(ell)
    s0 = _check_concentration(s0, "s0")
    if not math.isfinite(t) or t < 0:
        raise PreconditionError(f"t must be finite and nonnegative, got {t}")
    if t == 0:
        return s0
    sol = _integrate(params, ell, s0, t, config, dense=False)
    return float(sol.y[0, -1])


class FlowSegment:
    """Dense solution of the flow from (ℓ, s₀), extended on demand.

    Local time u starts at 0. Pieces are chained solve_ivp dense outputs.
    """

    def __init__(
        self,
        params: ChemostatParams,
        ell: int,
        s0: float,
        config: FlowSolverConfig = DEFAULT_CONFIG,
        horizon: float = 1.0,
    ):
        self.params = params
        self.ell = check_count(ell)
        self.s0 = _check_concentration(s0, "s0")
        self.config = config
        self._ends: list[float] = []
        self._pieces = []
        self._end_value = self.s0
        self.extend(max(horizon, 1e-12))

    @property
    def t_end(self) -> float:
        return self._ends[-1] if self._ends else 0.0

    def extend(self, t_new: float) -> None:
        if t_new <= self.t_end:
            return
        offset = self.t_end
        length = t_new - offset
        sol = _integrate(
            self.params, self.ell, self._end_value, length, self.config, dense=True
        )
        self._pieces.append((offset, sol.sol))
        self._ends.append(offset + length)
        self._end_value = float(sol.y[0, -1])

    def __call__(self, u: float) -> float:
        if u < 0:
            raise PreconditionError(f"u must be nonnegative, got {u}")
        if u == 0:
            return self.s0
        if u > self.t_end:
            self.extend(max(u, 2 * self.t_end))
        index = min(bisect.bisect_left(self._ends, u), len(self._pieces) - 1)
        offset, dense = self._pieces[index]
        return float(dense(u - offset)[0])


def _speed_bound(params: ChemostatParams, ell: int, s_hi: float) -> float:
    """Upper bound of |drift| on [0, s_hi]."""
    return params.D * max(params.s_in, s_hi) + params.k * float(
        params.growth.eval(s_hi)
    ) * max(ell, 1)


def time_to_reach(
    params: ChemostatParams,
    ell: int,
    s0: float,
    s: float,
    config: FlowSolverConfig = DEFAULT_CONFIG,
) -> float:
    """φ̃(ℓ, s₀, s): time for the flow from s₀ to reach s.

    Finite exactly when s lies in [s₀, s̄_ℓ) or (s̄_ℓ, s₀]. Otherwise an
    ``Unreachable`` infinity is returned, flagged ``near_equilibrium`` when
    |s - s̄_ℓ| < 1e3·root_tol.
    """
    ell = check_count(ell)
    s0 = _check_concentration(s0, "s0")
    s = _check_concentration(s, "s")
    if s == s0:
        return 0.0

    s_bar = equilibrium(params, ell, config.root_tol)
    if abs(s - s_bar) < 1e3 * config.root_tol:
        return Unreachable(near_equilibrium=True)
    if s0 == s_bar or not (s0 < s < s_bar or s_bar < s < s0):
        return Unreachable()

    t_lo = abs(s - s0) / _speed_bound(params, ell, max(s0, s))
    increasing = s0 < s_bar

    def gap(value: float) -> float:
        return value - s if increasing else s - value

    segment = FlowSegment(params, ell, s0, config, horizon=2 * t_lo)
    t_hi = 2 * t_lo
    while gap(segment(t_hi)) < 0:
        t_hi *= 2
        if t_hi > 1e12:
            raise NumericError(
                "time_to_reach bracket did not close",
                diagnostics={"ell": ell, "s0": s0, "s": s, "t_hi": t_hi},
            )

    t_star = brentq(
        lambda u: gap(segment(u)),
        0.0,
        t_hi,
        xtol=1e-3 * config.root_tol,
        rtol=ROOT_RTOL,
        maxiter=500,
    )

    # Newton polish against fresh integrations of the flow
    for _ in range(4):
        value = flow(params, ell, s0, t_star, config)
        residual = value - s
        if abs(residual) <= config.root_tol:
            break
        t_star -= residual / float(params.drift(ell, value))
    else:
        logger.debug(
            f"time_to_reach residual {abs(residual):.2e} above root_tol "
            f"(ell={ell}, s0={s0}, s={s})"
        )
    return float(t_star)


def initial_for(
    params: ChemostatParams,
    ell: int,
    s: float,
    t: float,
    config: FlowSolverConfig = DEFAULT_CONFIG,
) -> float:
    """φ⁻ˢ(ℓ, s, t): initial concentration whose flow lands on s after t.

    Returns 0 when s < φ(ℓ, 0, t), i.e. when no nonnegative start works.
    """
    ell = check_count(ell)
    s = _check_concentration(s, "s")
    if not math.isfinite(t) or t < 0:
        raise PreconditionError(f"t must be finite and nonnegative, got {t}")
    if t == 0:
        return s
    if s < flow(params, ell, 0.0, t, config):
        return 0.0

    s_bar = equilibrium(params, ell, config.root_tol)
    if s == s_bar:
        return s
    if s < s_bar:
        lo, hi = 0.0, s
    else:
        lo, hi = s, s_bar + 2 * (s - s_bar)
        while flow(params, ell, hi, t, config) < s:
            hi = s_bar + 2 * (hi - s_bar)
            if hi > 1e12:
                raise NumericError(
                    "initial_for bracket did not close",
                    diagnostics={"ell": ell, "s": s, "t": t, "hi": hi},
                )

    def miss(s0: float) -> float:
        return flow(params, ell, s0, t, config) - s

    if miss(lo) >= 0:
        return lo
    return float(
        brentq(miss, lo, hi, xtol=1e-3 * config.root_tol, rtol=ROOT_RTOL, maxiter=500)
    )


def phit_additivity_check(
    params: ChemostatParams,
    ell: int,
    s0: float,
    s1: float,
    s2: float,
    config: FlowSolverConfig = DEFAULT_CONFIG,
    tol: float | None = None,
) -> bool:
    """φ̃(ℓ,s₀,s₂) = φ̃(ℓ,s₀,s₁) + φ̃(ℓ,s₁,s₂) for points ordered along the flow.

    Raises:
        PreconditionError: the three points are not on one side of s̄_ℓ in
            flow order
    """
    s_bar = equilibrium(params, ell, config.root_tol)
    below = s0 <= s1 <= s2 < s_bar
    above = s0 >= s1 >= s2 > s_bar
    if not (below or above):
        raise PreconditionError(
            f"points ({s0}, {s1}, {s2}) are not ordered on one side of "
            f"s_bar_{ell}={s_bar:.6g}"
        )
    tol = 10 * config.root_tol if tol is None else tol
    whole = time_to_reach(params, ell, s0, s2, config)
    first = time_to_reach(params, ell, s0, s1, config)
    second = time_to_reach(params, ell, s1, s2, config)
    difference = abs(whole - first - second)
    logger.debug(f"phit additivity difference {difference:.3e} (tol {tol:.1e})")
    return bool(difference <= tol)


def flow_table(
    params: ChemostatParams,
    ell: int,
    s0: float,
    times: np.ndarray,
    config: FlowSolverConfig = DEFAULT_CONFIG,
) -> list[dict]:
    """Rows (t, s) of one flow curve, evaluated on a single dense solve."""
    times = np.asarray(times, dtype=float)
    horizon = float(times.max(initial=0.0))
    segment = FlowSegment(params, ell, s0, config, horizon=horizon)
    return [
        {"ell": ell, "s0": s0, "t": float(t), "s": segment(float(t))} for t in times
    ]
