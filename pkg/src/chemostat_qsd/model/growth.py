"""Specific growth-rate laws μ(s).

Every law supplies ``eval`` and ``deriv``; both accept scalars or numpy arrays.
For ``LipschitzLaw`` the ``deriv`` slot holds a local Lipschitz constant
instead of a derivative, which is all the exponent range needs.
"""

from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..common.errors import ConfigurationError


class GrowthKind(Enum):
    """Catalog of growth laws."""

    LINEAR = "linear"
    MONOD = "monod"
    CUSTOM = "custom"
    LIPSCHITZ = "lipschitz"


class GrowthLaw(ABC):
    """Increasing growth law with μ(0) = 0."""

    kind: GrowthKind

    @abstractmethod
    def eval(self, s):
        """Growth rate μ(s)."""

    @abstractmethod
    def deriv(self, s):
        """Derivative μ'(s), or a local Lipschitz constant."""

    @property
    def derivative_kind(self) -> str:
        return "exact"

    def sup_on(self, upper: float) -> float:
        """sup of μ on [0, upper]; μ is increasing."""
        return float(self.eval(upper))

    def deriv_sup_on(self, upper: float, points: int = 2049) -> float:
        """sup of μ' on [0, upper], by dense sampling."""
        if upper <= 0:
            return float(self.deriv(0.0))
        grid = np.linspace(0.0, upper, points)
        return float(np.max(self.deriv(grid)))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value}


@dataclass(frozen=True)
class LinearLaw(GrowthLaw):
    """μ(s) = c·s."""

    c: float
    kind: GrowthKind = field(default=GrowthKind.LINEAR, init=False)

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0:
            raise ConfigurationError(f"growth.c must be positive, got {self.c}")

    def eval(self, s):
        return self.c * s

    def deriv(self, s):
        return self.c * np.ones_like(s, dtype=float) if np.ndim(s) else self.c

    def deriv_sup_on(self, upper: float, points: int = 2049) -> float:
        return self.c

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "c": self.c}


@dataclass(frozen=True)
class MonodLaw(GrowthLaw):
    """μ(s) = m·s/(K + s)."""

    m: float
    K: float  # noqa: N815
    kind: GrowthKind = field(default=GrowthKind.MONOD, init=False)

    def __post_init__(self):
        if not np.isfinite(self.m) or self.m <= 0:
            raise ConfigurationError(f"growth.m must be positive, got {self.m}")
        if not np.isfinite(self.K) or self.K <= 0:
            raise ConfigurationError(f"growth.K must be positive, got {self.K}")

    def eval(self, s):
        return self.m * s / (self.K + s)

    def deriv(self, s):
        return self.m * self.K / (self.K + s) ** 2

    def deriv_sup_on(self, upper: float, points: int = 2049) -> float:
        # μ' is decreasing for Monod
        return self.m / self.K

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "m": self.m, "K": self.K}


@dataclass(frozen=True)
class CustomLaw(GrowthLaw):
    """User-supplied smooth law; both callables must accept numpy arrays."""

    eval_fn: Callable
    deriv_fn: Callable
    name: str = "custom"
    kind: GrowthKind = field(default=GrowthKind.CUSTOM, init=False)

    def eval(self, s):
        return self.eval_fn(s)

    def deriv(self, s):
        return self.deriv_fn(s)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "name": self.name}


@dataclass(frozen=True)
class LipschitzLaw(GrowthLaw):
    """Locally Lipschitz law; ``lipschitz_fn(s)`` bounds the slope near s."""

    eval_fn: Callable
    lipschitz_fn: Callable
    name: str = "lipschitz"
    kind: GrowthKind = field(default=GrowthKind.LIPSCHITZ, init=False)

    def eval(self, s):
        return self.eval_fn(s)

    def deriv(self, s):
        return self.lipschitz_fn(s)

    @property
    def derivative_kind(self) -> str:
        return "lipschitz"

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "name": self.name}


_LINEAR_KEYS = {"c"}
_MONOD_KEYS = {"m", "K"}


def growth_law_from_dict(config: dict[str, Any]) -> GrowthLaw:
    """Build a catalog law from a ``growth`` config block.

    Args:
        config: Mapping with ``kind`` and the law's parameters

    Returns:
        LinearLaw or MonodLaw

    Raises:
        ConfigurationError: unknown kind, missing keys, or keys of both laws
    """
    keys = set(config) - {"kind"}
    if keys & _LINEAR_KEYS and keys & _MONOD_KEYS:
        raise ConfigurationError(
            "growth block mixes Linear and Monod keys",
            issues=[f"growth: conflicting keys {sorted(keys)}"],
        )

    raw_kind = config.get("kind")
    try:
        kind = GrowthKind(str(raw_kind).lower())
    except ValueError:
        raise ConfigurationError(
            f"growth.kind must be 'linear' or 'monod', got {raw_kind!r}"
        ) from None

    if kind is GrowthKind.LINEAR:
        expected = _LINEAR_KEYS
    elif kind is GrowthKind.MONOD:
        expected = _MONOD_KEYS
    else:
        raise ConfigurationError(
            f"growth.kind {kind.value!r} cannot be loaded from a config file"
        )

    issues = [f"growth.{key}: missing" for key in sorted(expected - keys)]
    issues += [f"growth.{key}: unknown key" for key in sorted(keys - expected)]
    if issues:
        raise ConfigurationError("invalid growth block", issues=issues)

    if kind is GrowthKind.LINEAR:
        return LinearLaw(c=float(config["c"]))
    return MonodLaw(m=float(config["m"]), K=float(config["K"]))
