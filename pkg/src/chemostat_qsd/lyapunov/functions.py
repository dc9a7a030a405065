"""Test functions ψ, W, V and g with their analytic s-derivatives."""

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..common.errors import DomainError


@dataclass(frozen=True)
class DifferentiableFunction:
    """f(x, s) on ℕ × ℝ₊ with its s-derivative; both vectorized in s."""

    name: str
    value: Callable
    ds: Callable | None = None

    def __call__(self, x: int, s):
        return self.value(x, s)


def _check_interior(s, s_bar_1: float) -> None:
    array = np.asarray(s, dtype=float)
    if np.any(array <= 0) or np.any(array >= s_bar_1):
        raise DomainError(f"s must lie in (0, {s_bar_1:.6g})")


def _check_population(x: int) -> None:
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")


def psi(x: int, s=None) -> float:
    """ψ(x, s) = x, extended by ψ(0, s) = 0."""
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    return float(x)


def _w_value(rho: float, p: float, s_bar_1: float, x: int, s):
    return rho**x + 1.0 / s + (s_bar_1 - s) ** (-p)


def _w_ds(rho: float, p: float, s_bar_1: float, x: int, s):
    return -1.0 / s**2 + p * (s_bar_1 - s) ** (-p - 1)


def W(config, x: int, s):  # noqa: N802
    """W_{ρ,p}(x, s) = ρˣ + 1/s + (s̄₁ - s)^(-p) on ℕ* × (0, s̄₁)."""
    _check_population(x)
    _check_interior(s, config.s_bar_1)
    return _w_value(config.rho, config.p, config.s_bar_1, x, s)


def _v_weight(theta: float, x: int) -> float:
    return 1.0 + theta if x <= 1 else 1.0


def _v_value(config, x: int, s):
    log_rho = math.log(config.rho)
    return (
        config.rho**x * np.exp(config.alpha * s) / log_rho
        + 1.0 / s
        + _v_weight(config.theta, x) * (config.s_bar_1 - s) ** (-config.p)
    )


def _v_ds(config, x: int, s):
    log_rho = math.log(config.rho)
    return (
        config.alpha * config.rho**x * np.exp(config.alpha * s) / log_rho
        - 1.0 / s**2
        + _v_weight(config.theta, x)
        * config.p
        * (config.s_bar_1 - s) ** (-config.p - 1)
    )


def V(config, x: int, s):  # noqa: N802
    """V(x, s) = ρˣe^{αs}/log ρ + 1/s + (1 + 1_{x≤1}θ)(s̄₁ - s)^(-p)."""
    _check_population(x)
    _check_interior(s, config.s_bar_1)
    return _v_value(config, x, s)


def psi_function() -> DifferentiableFunction:
    return DifferentiableFunction(
        name="psi",
        value=lambda x, s: float(x) * np.ones_like(s, dtype=float),
        ds=lambda x, s: np.zeros_like(s, dtype=float),
    )


def w_function(config) -> DifferentiableFunction:
    return DifferentiableFunction(
        name="W",
        value=lambda x, s: _w_value(config.rho, config.p, config.s_bar_1, x, s),
        ds=lambda x, s: _w_ds(config.rho, config.p, config.s_bar_1, x, s),
    )


def v_function(config) -> DifferentiableFunction:
    """V with its natural extension to x = 0, as seen by the generator."""
    return DifferentiableFunction(
        name="V",
        value=lambda x, s: _v_value(config, x, s),
        ds=lambda x, s: _v_ds(config, x, s),
    )


def g_weight(x: int, delta0: float, delta1: float) -> float:
    if x >= 2:
        return 1.0
    if x == 1:
        return 1.0 + delta1
    return delta0


def g_function(beta: float, delta0: float, delta1: float) -> DifferentiableFunction:
    """g(x, s) = (1_{x≥2} + (1+δ₁)1_{x=1} + δ₀1_{x=0}) e^{βs}."""
    return DifferentiableFunction(
        name="g",
        value=lambda x, s: g_weight(x, delta0, delta1) * np.exp(beta * s),
        ds=lambda x, s: beta * g_weight(x, delta0, delta1) * np.exp(beta * s),
    )


def sandwich_constants(config, params=None) -> tuple[float, float]:
    """(c_low, c_high) with c_low·W ≤ V ≤ c_high·W on ℕ* × (0, s̄₁)."""
    log_rho = math.log(config.rho)
    c_low = min(1.0 / log_rho, 1.0)
    c_high = max(1.0 + config.theta, math.exp(config.alpha * config.s_bar_1) / log_rho)
    return c_low, c_high
