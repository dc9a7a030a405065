"""The infinitesimal generator of the hybrid process."""

import numpy as np

from ..common.errors import ConfigurationError, DomainError
from ..model.params import ChemostatParams
from .functions import DifferentiableFunction


def generator_apply(params: ChemostatParams, f: DifferentiableFunction, x: int, s):
    """Lf(x, s) = drift·∂ₛf + μ(s)x[f(x+1,s) - f] + Dx[f(x-1,s) - f].

    Vectorized in s for a fixed integer x.

    Raises:
        ConfigurationError: f carries no s-derivative (no finite differencing)
        DomainError: x < 0 or s < 0
    """
    if f.ds is None:
        raise ConfigurationError(
            f"function {f.name!r} has no analytic s-derivative; "
            "finite differencing is refused"
        )
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("s must be nonnegative")

    here = f.value(x, s)
    result = params.drift(x, s) * f.ds(x, s)
    if x >= 1:
        mu = params.growth.eval(s)
        result = result + mu * x * (f.value(x + 1, s) - here)
        result = result + params.D * x * (f.value(x - 1, s) - here)
    if np.ndim(result) == 0:
        return float(result)
    return result


def lv_components(params: ChemostatParams, config, x: int, s) -> dict:
    """Closed forms of LV₀, LV₁, LV₂ for the three summands of V.

    V₀ = ρˣe^{αs}/log ρ, V₁ = 1/s and V₂ = (1 + 1_{x≤1}θ)(s̄₁ - s)^(-p).
    """
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    s = np.asarray(s, dtype=float)
    mu = params.growth.eval(s)
    drift = params.drift(x, s)
    rho, theta, p = config.rho, config.theta, config.p

    v0 = rho**x * np.exp(config.alpha * s) / np.log(rho)
    v1 = 1.0 / s
    v2 = (1.0 + theta if x <= 1 else 1.0) * (config.s_bar_1 - s) ** (-p)

    lv0 = (drift * config.alpha + (rho - 1.0) * (mu - params.D / rho) * x) * v0
    lv1 = -drift / s * v1
    ratio2 = p * drift / (config.s_bar_1 - s)
    if x == 1:
        ratio2 = ratio2 - mu * theta / (1.0 + theta)
    elif x == 2:
        ratio2 = ratio2 + 2.0 * params.D * theta
    lv2 = ratio2 * v2
    return {"V0": v0, "V1": v1, "V2": v2, "LV0": lv0, "LV1": lv1, "LV2": lv2}
