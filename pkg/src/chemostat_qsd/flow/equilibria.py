"""Substrate equilibria s̄_ℓ: roots of D(s_in - s) - kμ(s)ℓ on (0, s_in)."""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from loguru import logger
from scipy.optimize import brentq

from ..common.errors import NumericError, PreconditionError
from ..model.params import ChemostatParams

DEFAULT_ROOT_TOL = 1e-11
# smallest relative tolerance brentq accepts
ROOT_RTOL = 4 * float(np.finfo(float).eps)


def check_count(ell, name: str = "ell", minimum: int = 0) -> int:
    """Coerce a population count, rejecting bools, floats and small values."""
    if isinstance(ell, bool) or not isinstance(ell, int | np.integer):
        raise PreconditionError(f"{name} must be an integer, got {ell!r}")
    if ell < minimum:
        raise PreconditionError(f"{name} must be >= {minimum}, got {ell}")
    return int(ell)


@lru_cache(maxsize=8192)
def _solve(params: ChemostatParams, ell: int, root_tol: float) -> float:
    def balance(s: float) -> float:
        return float(params.drift(ell, s))

    root, info = brentq(
        balance,
        0.0,
        params.s_in,
        xtol=1e-3 * root_tol * params.s_in,
        rtol=ROOT_RTOL,
        maxiter=500,
        full_output=True,
        disp=False,
    )
    residual = abs(balance(root))
    if not info.converged or residual > root_tol * max(1.0, params.D * params.s_in):
        raise NumericError(
            f"equilibrium for ell={ell} did not converge",
            diagnostics={
                "ell": ell,
                "root": root,
                "residual": residual,
                "iterations": info.iterations,
                "flag": info.flag,
            },
        )
    return float(root)


def equilibrium(
    params: ChemostatParams, ell: int, root_tol: float = DEFAULT_ROOT_TOL
) -> float:
    """s̄_ℓ, the unique zero of the substrate drift with ℓ bacteria.

    ℓ = 0 is accepted and gives s_in (washout-only dynamics).

    Args:
        params: Chemostat parameters
        ell: Population size held fixed
        root_tol: Residual tolerance on the drift

    Returns:
        s̄_ℓ in (0, s_in) for ℓ ≥ 1
    """
    ell = check_count(ell)
    if ell == 0:
        return params.s_in
    return _solve(params, ell, root_tol)


@dataclass
class EquilibriumTable:
    """s̄_1 > s̄_2 > ... > s̄_L for one parameter set."""

    params: ChemostatParams
    values: dict[int, float] = field(default_factory=dict)
    root_tol: float = DEFAULT_ROOT_TOL

    @classmethod
    def build(
        cls, params: ChemostatParams, L: int, root_tol: float = DEFAULT_ROOT_TOL
    ) -> "EquilibriumTable":
        L = check_count(L, "L", minimum=1)
        table = cls(params=params, root_tol=root_tol)
        for ell in range(1, L + 1):
            table.values[ell] = equilibrium(params, ell, root_tol)
        table.check_decreasing()
        logger.debug(
            f"Built equilibrium table up to L={L}: s_bar_L={table.values[L]:.3e}"
        )
        return table

    def __getitem__(self, ell: int) -> float:
        if ell not in self.values:
            self.values[ell] = equilibrium(self.params, ell, self.root_tol)
        return self.values[ell]

    def __len__(self) -> int:
        return len(self.values)

    def check_decreasing(self) -> None:
        ells = sorted(self.values)
        for a, b in zip(ells, ells[1:], strict=False):
            if not self.values[b] < self.values[a]:
                raise NumericError(
                    f"equilibria not strictly decreasing at ell={b}",
                    diagnostics={
                        "ell": b,
                        "prev": self.values[a],
                        "value": self.values[b],
                    },
                )

    def first_below(self, threshold: float, max_ell: int = 1_000_000) -> int:
        """Smallest ℓ with s̄_ℓ < threshold."""
        if threshold <= 0:
            raise PreconditionError(f"threshold must be positive, got {threshold}")
        ell = 1
        while self[ell] >= threshold:
            ell += 1
            if ell > max_ell:
                raise NumericError(
                    f"no equilibrium below {threshold} up to ell={max_ell}",
                    diagnostics={"threshold": threshold},
                )
        return ell

    def to_rows(self) -> list[dict]:
        return [
            {
                "ell": ell,
                "s_bar": value,
                "residual": float(self.params.drift(ell, value)),
            }
            for ell, value in sorted(self.values.items())
        ]
