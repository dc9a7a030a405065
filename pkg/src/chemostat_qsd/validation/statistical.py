"""Statistical checks of Monte Carlo estimates against analytic values."""

import math
from collections.abc import Callable

import numpy as np
from loguru import logger
from scipy import stats

from .base import BaseCheck


class ProportionCheck(BaseCheck):
    """Binomial frequency against an analytic probability."""

    def __init__(self, name: str = "Proportion", sigmas: float = 3.0):
        super().__init__(name=name, sigmas=sigmas)

    def _check(self, outcomes, probability: float) -> tuple[bool, dict]:
        """
        Args:
            outcomes: Array of 0/1 indicators
            probability: Analytic probability of a 1
        """
        outcomes = np.asarray(outcomes, dtype=float)
        n = outcomes.size
        p_hat = float(outcomes.mean())
        sigma = math.sqrt(max(probability * (1 - probability), 1.0 / n) / n)
        z = (p_hat - probability) / sigma
        passed = abs(z) <= self.config["sigmas"]
        metrics = {
            "p_hat": p_hat,
            "probability": float(probability),
            "z_score": float(z),
            "n": n,
            "sigmas": self.config["sigmas"],
            "interpretation": "Frequency matches" if passed else "Frequency differs",
        }
        logger.info(f"{self.name}: p_hat={p_hat:.5f} vs {probability:.5f}, z={z:.2f}")
        return passed, metrics


class MeanBoundCheck(BaseCheck):
    """One-sided check that a sample mean does not exceed (or undercut) a bound."""

    def __init__(
        self, name: str = "Mean bound", level: float = 0.99, upper: bool = True
    ):
        super().__init__(name=name, level=level, upper=upper)

    def _check(self, values, bound: float) -> tuple[bool, dict]:
        values = np.asarray(values, dtype=float)
        n = values.size
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        z = stats.norm.ppf(self.config["level"])
        if self.config["upper"]:
            passed = mean - z * stderr <= bound
        else:
            passed = mean + z * stderr >= bound
        side = "<=" if self.config["upper"] else ">="
        metrics = {
            "mean": mean,
            "stderr": stderr,
            "bound": float(bound),
            "n": n,
            "level": self.config["level"],
            "interpretation": f"mean {side} bound {'holds' if passed else 'violated'}",
        }
        logger.info(f"{self.name}: mean={mean:.5g} +/- {stderr:.2g}, bound {bound:.5g}")
        return passed, metrics


class ExponentialKSCheck(BaseCheck):
    """One-sample Kolmogorov-Smirnov test against an analytic CDF."""

    def __init__(self, name: str = "Kolmogorov-Smirnov Test", alpha: float = 0.01):
        super().__init__(name=name, alpha=alpha)

    def _check(self, sample, cdf: Callable) -> tuple[bool, dict]:
        sample = np.asarray(sample, dtype=float)
        statistic, p_value = stats.kstest(sample, cdf)
        passed = p_value > self.config["alpha"]
        metrics = {
            "statistic": float(statistic),
            "p_value": float(p_value),
            "alpha": self.config["alpha"],
            "sample_size": int(sample.size),
            "sample_mean": float(sample.mean()),
            "interpretation": "Law matches" if passed else "Law differs significantly",
        }
        logger.info(
            f"{self.name}: KS statistic={statistic:.4f}, p_value={p_value:.4f}"
        )
        return passed, metrics


class ToleranceCheck(BaseCheck):
    """Deterministic value against a reference within an absolute tolerance."""

    def __init__(self, name: str, tolerance: float = 1e-8):
        super().__init__(name=name, tolerance=tolerance)

    def _check(self, observed, expected) -> tuple[bool, dict]:
        observed = np.atleast_1d(np.asarray(observed, dtype=float))
        expected = np.atleast_1d(np.asarray(expected, dtype=float))
        error = float(np.max(np.abs(observed - expected)))
        passed = error <= self.config["tolerance"]
        metrics = {
            "max_abs_error": error,
            "tolerance": self.config["tolerance"],
            "points": int(observed.size),
        }
        logger.debug(f"{self.name}: max error {error:.3e}")
        return passed, metrics
