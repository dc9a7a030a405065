"""Small-set minorization: the constant ε₁ and the measure ν.

From (2, s) with s ∈ [s₀, s₁], a washout before τ₀ followed by no further
jump spreads S_{τ₀} with density at least ε₁ over
[φ(2, s₁, τ₀), φ(1, s₀, τ₀)].
"""

import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from loguru import logger
from scipy.integrate import quad

from ..common.errors import PreconditionError
from ..flow.equilibria import equilibrium
from ..flow.solver import FlowSegment, flow, initial_for, time_to_reach
from ..model.params import ChemostatParams
from ..simulate.engine import SIMULATION_CONFIG, simulate_path
from ..simulate.ensemble import run_replicas


@dataclass(frozen=True)
class SmallSetResult:
    """ε₁ and ν = δ₁(dx) ⊗ Uniform[nu_lo, nu_hi](ds)."""

    eps1: float
    c0: float
    tau0: float
    s0: float
    s1: float
    nu_lo: float
    nu_hi: float
    growth_integral: float
    nu_mass: float = 1.0

    def nu(self, a: float, b: float) -> float:
        """ν({1} × [a, b])."""
        overlap = max(0.0, min(b, self.nu_hi) - max(a, self.nu_lo))
        return self.nu_mass * overlap / (self.nu_hi - self.nu_lo)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eps1": self.eps1,
            "c0": self.c0,
            "tau0": self.tau0,
            "s0": self.s0,
            "s1": self.s1,
            "nu": {
                "x": 1,
                "s_lo": self.nu_lo,
                "s_hi": self.nu_hi,
                "mass": self.nu_mass,
            },
            "growth_integral": self.growth_integral,
        }


def small_set_constant(
    params: ChemostatParams, tau0: float, s0: float, s1: float
) -> SmallSetResult:
    """ε₁ = c₀·2D·e^{-2Dτ₀}·e^{-2∫₀^{τ₀}μ(φ(1,s₁,u))du}·(φ(1,s₀,τ₀) - φ(2,s₁,τ₀)).

    Raises:
        PreconditionError: s₀ ≥ s₁, or φ(2, s₁, τ₀) ≥ φ(1, s₀, τ₀) (pick a
            smaller τ₀ or a smaller s₁)
    """
    if not tau0 > 0:
        raise PreconditionError(f"tau0 must be positive, got {tau0}")
    if not 0 < s0 < s1:
        raise PreconditionError(f"need 0 < s0 < s1, got s0={s0}, s1={s1}")
    upper = flow(params, 1, s0, tau0)
    lower = flow(params, 2, s1, tau0)
    if not lower < upper:
        raise PreconditionError(
            f"phi(2, s1, tau0)={lower:.6g} >= phi(1, s0, tau0)={upper:.6g}; "
            "choose a larger tau0 or a smaller s1"
        )

    s_bar_2 = equilibrium(params, 2)
    mu_2 = float(params.growth.eval(s_bar_2))
    c0 = 1.0 / (params.D * params.s_in + 2 * params.k * mu_2)
    segment = FlowSegment(params, 1, s1, horizon=tau0)
    integral, _ = quad(
        lambda u: float(params.growth.eval(segment(u))),
        0.0,
        tau0,
        epsabs=1e-14,
        epsrel=1e-11,
        limit=200,
    )
    eps1 = (
        c0
        * 2
        * params.D
        * math.exp(-2 * params.D * tau0 - 2 * integral)
        * (upper - lower)
    )
    logger.debug(f"Small set: eps1={eps1:.4e}, nu on [{lower:.6g}, {upper:.6g}]")
    return SmallSetResult(eps1, c0, tau0, s0, s1, lower, upper, integral)


def choose_small_set_points(
    params: ChemostatParams, tau0: float, delta1: float, delta2: float
) -> tuple[float, float]:
    """(s₀, s₁) with φ(1, s₀, τ₀) > δ₁ and φ(2, s₁, τ₀) < δ₂.

    Midpoints of the admissible intervals. Requires τ₀ < φ̃(2, 0, δ₂).
    """
    if not 0 < delta1 < delta2:
        raise PreconditionError(f"need 0 < delta1 < delta2, got [{delta1}, {delta2}]")
    reach = time_to_reach(params, 2, 0.0, delta2)
    if not tau0 < reach:
        raise PreconditionError(
            f"tau0={tau0} must be below the time {reach:.6g} to reach delta2 from 0 "
            "with two individuals"
        )
    back_2 = initial_for(params, 2, delta2, tau0)
    s0_lo = initial_for(params, 1, delta1, tau0)
    s0_hi = min(delta1, back_2)
    if not s0_lo < s0_hi:
        raise PreconditionError("no admissible s0; choose a smaller tau0")
    s0 = 0.5 * (s0_lo + s0_hi)
    s1_hi = min(back_2, initial_for(params, 2, flow(params, 1, s0, tau0), tau0))
    if not s0 < s1_hi:
        raise PreconditionError("no admissible s1; choose a smaller tau0")
    return s0, 0.5 * (s0 + s1_hi)


def restrict_small_set(
    result: SmallSetResult, n_k: int, delta1: float, delta2: float
) -> SmallSetResult:
    """ν̃ = ν(1_K ·)/ν(K) and ε̃₁ = ε₁ν(K) for K = ⟦1, n_k⟧ × [δ₁, δ₂].

    Raises:
        PreconditionError: ν(K) = 0
    """
    if n_k < 1:
        raise PreconditionError(f"n_k must be >= 1, got {n_k}")
    mass = result.nu(delta1, delta2)
    if mass <= 0:
        raise PreconditionError(
            f"nu puts no mass on [{delta1}, {delta2}]; "
            f"its support is [{result.nu_lo:.6g}, {result.nu_hi:.6g}]"
        )
    return replace(
        result,
        eps1=result.eps1 * mass,
        nu_lo=max(result.nu_lo, delta1),
        nu_hi=min(result.nu_hi, delta2),
        nu_mass=1.0,
    )


@dataclass(frozen=True)
class _TerminalTask:
    params: ChemostatParams
    x0: int
    s0: float
    horizon: float

    def __call__(self, index: int, rng: np.random.Generator) -> tuple[int, float]:
        trajectory = simulate_path(
            self.params, self.x0, self.s0, self.horizon, rng, SIMULATION_CONFIG
        )
        state = trajectory.final_state
        return state.x, state.s


def small_set_mc_check(
    params: ChemostatParams,
    result: SmallSetResult,
    starts: list[float],
    n: int,
    master_seed: int,
    pieces: int = 4,
    threads: int = 1,
) -> dict[str, Any]:
    """Check P̂_(2,s)((X_τ₀, S_τ₀) ∈ {1} × A) ≥ ε₁ν(A) - 3σ on ``pieces``
    equal subintervals A of the support of ν, for each start s."""
    edges = np.linspace(result.nu_lo, result.nu_hi, pieces + 1)
    rows = []
    for j, s in enumerate(starts):
        if not result.s0 <= s <= result.s1:
            raise PreconditionError(f"start s={s} outside [{result.s0}, {result.s1}]")
        finals = run_replicas(
            _TerminalTask(params, 2, float(s), result.tau0),
            n,
            master_seed,
            threads=threads,
            base_stream=j * n,
            desc=f"small set paths from (2, {s:.4g})",
        )
        xs = np.array([x for x, _ in finals])
        ss = np.array([s_final for _, s_final in finals])
        for a, b in zip(edges, edges[1:], strict=False):
            p = float(np.mean((xs == 1) & (ss >= a) & (ss <= b)))
            sigma = math.sqrt(max(p * (1 - p), 1.0 / n) / n)
            target = result.eps1 * result.nu(a, b)
            rows.append(
                {
                    "start_s": float(s),
                    "a": float(a),
                    "b": float(b),
                    "p_hat": p,
                    "sigma": sigma,
                    "eps1_nu": target,
                    "passed": p >= target - 3 * sigma,
                }
            )
    return {
        "eps1": result.eps1,
        "rows": rows,
        "min_ratio": min(r["p_hat"] / r["eps1_nu"] for r in rows if r["eps1_nu"] > 0),
        "passed": all(r["passed"] for r in rows),
    }
