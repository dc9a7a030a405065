"""Histograms of conditioned states on shared (x, s-bin) cells."""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..common.errors import InternalInvariantError, PreconditionError

DEFAULT_S_BINS = 64
X_QUANTILE = 0.999


@dataclass(frozen=True)
class Binning:
    """Rows x = 1..x_max plus one overflow row; s_bins equal bins of (0, s_upper).

    Substrate values outside (0, s_upper) are counted in the edge bins and
    reported separately.
    """

    s_upper: float
    x_max: int
    s_bins: int = DEFAULT_S_BINS

    def __post_init__(self):
        if not self.s_upper > 0:
            raise PreconditionError(f"s_upper must be positive, got {self.s_upper}")
        if self.x_max < 1 or self.s_bins < 1:
            raise PreconditionError("x_max and s_bins must be >= 1")

    @classmethod
    def fit(
        cls,
        xs: np.ndarray,
        s_upper: float,
        s_bins: int = DEFAULT_S_BINS,
        quantile: float = X_QUANTILE,
    ) -> "Binning":
        """Truncate x at the given quantile of the pooled sample."""
        xs = np.asarray(xs)
        x_max = int(math.ceil(np.quantile(xs, quantile))) if xs.size else 1
        return cls(s_upper=float(s_upper), x_max=max(x_max, 1), s_bins=s_bins)

    @property
    def width(self) -> float:
        return self.s_upper / self.s_bins

    @property
    def shape(self) -> tuple[int, int]:
        return self.x_max + 1, self.s_bins

    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.s_upper, self.s_bins + 1)

    def counts(self, xs: np.ndarray, ss: np.ndarray) -> np.ndarray:
        rows = np.minimum(np.asarray(xs, dtype=int), self.x_max + 1) - 1
        cols = np.clip(
            np.floor(np.asarray(ss, dtype=float) / self.width).astype(int),
            0,
            self.s_bins - 1,
        )
        table = np.zeros(self.shape)
        np.add.at(table, (rows, cols), 1.0)
        return table

    def to_dict(self) -> dict[str, Any]:
        return {"s_upper": self.s_upper, "x_max": self.x_max, "s_bins": self.s_bins}


@dataclass
class QsdEstimate:
    """Empirical law of (X_t, S_t) given survival, with the samples kept."""

    masses: np.ndarray
    stderr: np.ndarray
    binning: Binning
    n: int
    time: float
    xs: np.ndarray
    ss: np.ndarray
    method: str
    outside: int = 0
    flags: list[str] = field(default_factory=list)

    @classmethod
    def from_samples(
        cls,
        xs,
        ss,
        binning: Binning,
        time: float,
        method: str,
        flags: list[str] | None = None,
    ) -> "QsdEstimate":
        xs = np.asarray(xs, dtype=int)
        ss = np.asarray(ss, dtype=float)
        if xs.size == 0:
            raise PreconditionError("cannot build a histogram from no samples")
        if np.any(xs < 1):
            raise InternalInvariantError(
                "conditioned sample contains an extinct state",
                diagnostics={"extinct": int(np.sum(xs < 1))},
            )
        masses = binning.counts(xs, ss) / xs.size
        outside = int(np.sum((ss <= 0) | (ss >= binning.s_upper)))
        return cls(
            masses=masses,
            stderr=np.sqrt(masses * (1.0 - masses) / xs.size),
            binning=binning,
            n=int(xs.size),
            time=time,
            xs=xs,
            ss=ss,
            method=method,
            outside=outside,
            flags=list(flags or []),
        )

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def marginal_x(self) -> np.ndarray:
        return self.masses.sum(axis=1)

    def mean_x(self) -> float:
        return float(self.xs.mean())

    def draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Resample n states from the stored sample."""
        index = rng.integers(0, self.n, size=n)
        return self.xs[index], self.ss[index]

    def to_rows(self) -> list[dict[str, Any]]:
        """Rows ``x,s_bin_lo,s_bin_hi,mass,stderr``; x = x_max + 1 is overflow."""
        edges = self.binning.edges()
        rows = []
        for i, j in zip(*np.nonzero(self.masses), strict=True):
            rows.append(
                {
                    "x": int(i) + 1,
                    "s_bin_lo": float(edges[j]),
                    "s_bin_hi": float(edges[j + 1]),
                    "mass": float(self.masses[i, j]),
                    "stderr": float(self.stderr[i, j]),
                }
            )
        return rows

    def summary(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "n": self.n,
            "time": self.time,
            "mean_x": self.mean_x(),
            "mean_s": float(self.ss.mean()),
            "outside": self.outside,
            "binning": self.binning.to_dict(),
            "flags": self.flags,
        }


def _tv(first: np.ndarray, second: np.ndarray) -> float:
    return 0.5 * float(np.abs(first - second).sum())


def total_variation(a: QsdEstimate, b: QsdEstimate) -> float:
    """½ Σ |a - b| over the shared cells."""
    if a.binning != b.binning:
        raise PreconditionError("estimates use different binnings")
    return _tv(a.masses, b.masses)


def tv_bootstrap_ci(
    a: QsdEstimate,
    b: QsdEstimate,
    rng: np.random.Generator,
    resamples: int = 200,
    level: float = 0.95,
) -> tuple[float, float, float]:
    """(TV, low, high) with a percentile bootstrap over both samples."""
    if a.binning != b.binning:
        raise PreconditionError("estimates use different binnings")
    binning = a.binning
    values = np.empty(resamples)
    for r in range(resamples):
        ia = rng.integers(0, a.n, size=a.n)
        ib = rng.integers(0, b.n, size=b.n)
        values[r] = _tv(
            binning.counts(a.xs[ia], a.ss[ia]) / a.n,
            binning.counts(b.xs[ib], b.ss[ib]) / b.n,
        )
    tail = 50.0 * (1.0 - level)
    low, high = np.percentile(values, [tail, 100.0 - tail])
    return total_variation(a, b), float(low), float(high)


def tv_noise_floor(
    a: QsdEstimate,
    b: QsdEstimate,
    rng: np.random.Generator,
    resamples: int = 200,
    quantile: float = 0.99,
) -> float:
    """Quantile of TV between random splits of the pooled sample.

    An observed TV below this value is indistinguishable from sampling noise.
    """
    if a.binning != b.binning:
        raise PreconditionError("estimates use different binnings")
    xs = np.concatenate([a.xs, b.xs])
    ss = np.concatenate([a.ss, b.ss])
    values = np.empty(resamples)
    for r in range(resamples):
        order = rng.permutation(xs.size)
        first, second = order[: a.n], order[a.n :]
        values[r] = _tv(
            a.binning.counts(xs[first], ss[first]) / a.n,
            a.binning.counts(xs[second], ss[second]) / b.n,
        )
    return float(np.quantile(values, quantile))
