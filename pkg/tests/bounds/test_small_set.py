"""Tests for the small-set minorization."""

import pytest

from chemostat_qsd.common.errors import PreconditionError
from chemostat_qsd.bounds import (
    choose_small_set_points,
    restrict_small_set,
    small_set_constant,
    small_set_mc_check,
)
from chemostat_qsd.flow import flow


@pytest.fixture
def small_set(linear_params):
    s0, s1 = choose_small_set_points(linear_params, 0.1, 0.1, 0.2)
    return small_set_constant(linear_params, 0.1, s0, s1)


class TestChoosePoints:
    """Test cases for choose_small_set_points."""

    def test_linear_points(self, linear_params):
        """Midpoints of the admissible intervals for τ₀ = 0.1, δ₁ = 0.1, δ₂ = 0.2."""
        s0, s1 = choose_small_set_points(linear_params, 0.1, 0.1, 0.2)
        assert s0 == pytest.approx(0.05, rel=1e-6)
        assert s0 < s1 < 0.2
        assert flow(linear_params, 1, s0, 0.1) > 0.1
        assert flow(linear_params, 2, s1, 0.1) < 0.2

    def test_tau0_too_large(self, linear_params):
        """τ₀ must be below the time to reach δ₂ from 0 with two individuals."""
        with pytest.raises(PreconditionError):
            choose_small_set_points(linear_params, 0.5, 0.1, 0.2)

    def test_unordered_deltas(self, linear_params):
        """0 < δ₁ < δ₂."""
        with pytest.raises(PreconditionError):
            choose_small_set_points(linear_params, 0.1, 0.2, 0.1)


class TestSmallSetConstant:
    """Test cases for small_set_constant and restrict_small_set."""

    def test_positive_constant(self, small_set):
        """ε₁ > 0 and ν has a proper support."""
        assert small_set.eps1 > 0
        assert small_set.nu_lo < small_set.nu_hi
        assert small_set.nu(small_set.nu_lo, small_set.nu_hi) == pytest.approx(1.0)

    def test_nu_is_uniform(self, small_set):
        """ν of half the support is one half."""
        mid = 0.5 * (small_set.nu_lo + small_set.nu_hi)
        assert small_set.nu(small_set.nu_lo, mid) == pytest.approx(0.5)
        assert small_set.nu(small_set.nu_hi + 1, small_set.nu_hi + 2) == 0.0

    def test_unordered_points(self, linear_params):
        """s₀ < s₁."""
        with pytest.raises(PreconditionError):
            small_set_constant(linear_params, 0.1, 0.08, 0.05)

    def test_overlapping_images(self, linear_params):
        """A short τ₀ leaves φ(2, s₁, τ₀) above φ(1, s₀, τ₀)."""
        assert flow(linear_params, 2, 0.4, 0.01) > flow(linear_params, 1, 0.05, 0.01)
        with pytest.raises(PreconditionError, match="larger tau0"):
            small_set_constant(linear_params, 0.01, 0.05, 0.4)

    def test_restrict_full_mass(self, small_set):
        """Restricting to a superset of the support keeps ε₁."""
        restricted = restrict_small_set(small_set, 3, 0.1, 0.2)
        assert restricted.eps1 == pytest.approx(small_set.eps1 * small_set.nu(0.1, 0.2))
        assert 0.1 <= restricted.nu_lo < restricted.nu_hi <= 0.2

    def test_restrict_without_mass(self, small_set):
        """K disjoint from the support of ν is refused."""
        with pytest.raises(PreconditionError):
            restrict_small_set(small_set, 3, 0.3, 0.4)

    def test_to_dict(self, small_set):
        """ν is serialized as a row-1 uniform law."""
        payload = small_set.to_dict()
        assert payload["nu"]["x"] == 1
        assert payload["eps1"] == small_set.eps1


class TestSmallSetMonteCarlo:
    """Test cases for small_set_mc_check."""

    def test_start_outside_interval(self, linear_params, small_set):
        """Starts must lie in [s₀, s₁]."""
        with pytest.raises(PreconditionError):
            small_set_mc_check(linear_params, small_set, [0.3], 10, 1)

    @pytest.mark.slow
    def test_minorization_holds(self, linear_params, small_set):
        """Empirical mass dominates ε₁ν on every piece."""
        starts = [small_set.s0, 0.5 * (small_set.s0 + small_set.s1), small_set.s1]
        report = small_set_mc_check(linear_params, small_set, starts, 2000, 8)
        assert report["passed"]
        assert len(report["rows"]) == 12
        assert report["min_ratio"] > 0
