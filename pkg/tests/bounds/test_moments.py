"""Tests for the moment bounds."""

import math

import pytest

from chemostat_qsd.common.errors import PreconditionError
from chemostat_qsd.bounds import (
    exp_moment_check,
    inv_substrate_moment_bound,
    inv_substrate_rhs,
)
from chemostat_qsd.lyapunov import select_g_constants


class TestInverseSubstrate:
    """Test cases for the E[1/S_t] bound."""

    def test_reference_rhs(self, linear_params):
        """x = 1, t = 0.3: (1 + 3e^{0.54})/(2(1 - e^{-0.3})) ≈ 11.85."""
        expected = (1 + 3 * math.exp(0.54)) / (2 * (1 - math.exp(-0.3)))
        assert inv_substrate_rhs(linear_params, 1, 0.3) == pytest.approx(expected)
        assert expected == pytest.approx(11.85, abs=0.02)

    def test_requires_positive_time(self, linear_params):
        """t > 0."""
        with pytest.raises(PreconditionError):
            inv_substrate_rhs(linear_params, 1, 0.0)

    def test_without_monte_carlo(self, linear_params):
        """n = 0 reports the bound only."""
        report = inv_substrate_moment_bound(linear_params, 1, 0.3)
        assert set(report) == {"x", "t", "rhs"}

    @pytest.mark.slow
    def test_monte_carlo_below_bound(self, linear_params):
        """The simulated mean respects the bound."""
        report = inv_substrate_moment_bound(linear_params, 1, 0.3, n=500, master_seed=4)
        assert report["passed"]
        assert 0 < report["mc"] < report["rhs"]


class TestExpMoment:
    """Test cases for exp_moment_check."""

    def test_start_below_equilibrium(self, linear_params):
        """The start must sit at or above s̄₁."""
        constants = select_g_constants(linear_params)
        with pytest.raises(PreconditionError):
            exp_moment_check(linear_params, constants, 1, 0.3, 10.0, 10, 1)

    @pytest.mark.slow
    def test_monte_carlo_below_bound(self, linear_params):
        """E[e^{(D+C)T}] stays below A e^{βs}."""
        constants = select_g_constants(linear_params)
        report = exp_moment_check(linear_params, constants, 1, 0.75, 200.0, 300, 6)
        assert not report.inconclusive
        assert report.hit_fraction > 0
        assert report.passed
        assert len(report.tail) == 3
        payload = report.to_dict()
        assert payload["passed"] is True
