"""Tests for QSD, λ and h estimators and their diagnostics."""

import math

import numpy as np
import pytest

from chemostat_qsd.common.errors import (
    InternalInvariantError,
    PreconditionError,
    StatisticalPowerError,
)
from chemostat_qsd.lyapunov import select_parameters
from chemostat_qsd.model import ChemostatParams, LinearLaw
from chemostat_qsd.qsd import (
    FixedPointReport,
    LambdaEstimate,
    LambdaMethod,
    MassRatioReport,
    ParticleEnsemble,
    YaglomReport,
    compact_points,
    estimate_h,
    estimate_lambda_survival,
    estimate_qsd_naive,
    evolve_fleming_viot,
    h_monotone_trend,
    h_over_w_grid,
    lambda_start_independence,
    mass_ratio_diagnostic,
    qsd_fixed_point_check,
    total_variation,
    tv_noise_floor,
    yaglom_distance,
)
from chemostat_qsd.qsd.estimators import OMEGA_NOISE_FLAG, _decay_fit


@pytest.fixture
def subcritical_params():
    """μ ≤ 0.8 < D everywhere: extinction is fast."""
    return ChemostatParams(D=1.0, s_in=2.0, k=1.0, growth=LinearLaw(c=0.4))


def make_lambda(hat, low, high):
    return LambdaEstimate(hat, low, high, LambdaMethod.SURVIVAL_REGRESSION, (1.0, 5.0))


class TestLambdaEstimate:
    """Test cases for LambdaEstimate."""

    def test_interval_must_contain_estimate(self):
        """A point estimate outside its interval is an invariant violation."""
        with pytest.raises(InternalInvariantError):
            make_lambda(0.5, 0.6, 0.7)

    def test_overlap_and_stderr(self):
        """Overlap is symmetric; stderr is the half-width over z₀.₉₇₅."""
        a = make_lambda(0.3, 0.2, 0.4)
        b = make_lambda(0.45, 0.39, 0.5)
        c = make_lambda(0.8, 0.7, 0.9)
        assert a.overlaps(b) and b.overlaps(a)
        assert not a.overlaps(c)
        assert a.stderr == pytest.approx(0.1 / 1.959963984540054)

    @pytest.mark.parametrize(
        "hat, low, high, inside",
        [
            (0.3, 0.2, 0.4, True),
            (1.0, 0.9, 1.1, True),
            (-0.2, -0.5, 0.1, False),
            (0.05, -0.01, 0.11, False),
            (1.2, 1.1, 1.3, False),
        ],
    )
    def test_within_washout(self, hat, low, high, inside):
        """Only a positive interval with λ̂ ≤ D certifies 0 < λ ≤ D."""
        assert make_lambda(hat, low, high).within_washout(1.0) is inside

    def test_to_dict_flattens_details(self):
        """Details are merged into the serialized form."""
        estimate = LambdaEstimate(
            0.3,
            0.2,
            0.4,
            LambdaMethod.FLEMING_VIOT_KILL_RATE,
            (5.0, 10.0),
            {"kills": 9},
        )
        payload = estimate.to_dict()
        assert payload["method"] == "fleming_viot_kill_rate"
        assert payload["kills"] == 9

    def test_start_independence(self):
        """Pairwise overlaps over several starts."""
        report = lambda_start_independence(
            [make_lambda(0.3, 0.2, 0.4), make_lambda(0.35, 0.3, 0.4)]
        )
        assert report["all_overlap"]
        assert report["pairs"][0]["difference"] == pytest.approx(-0.05)


class TestNaiveEstimator:
    """Test cases for estimate_qsd_naive."""

    def test_too_few_paths(self, linear_params):
        """At least 1000 paths."""
        with pytest.raises(PreconditionError):
            estimate_qsd_naive(linear_params, 1, 0.1, 1.0, 999, master_seed=1)

    def test_time_zero_is_point_mass(self, linear_params):
        """At t = 0 the conditioned law is the starting point."""
        estimate = estimate_qsd_naive(linear_params, 2, 0.2, 0.0, 1000, master_seed=1)
        assert estimate.n == 1000
        assert np.all(estimate.xs == 2)
        assert estimate.masses.max() == pytest.approx(1.0)

    def test_boundary_start_flagged(self, linear_params):
        """Starting at s = 0 is flagged."""
        estimate = estimate_qsd_naive(linear_params, 1, 0.0, 0.0, 1000, master_seed=1)
        assert estimate.flags

    @pytest.mark.slow
    def test_too_few_survivors(self, subcritical_params):
        """Under 100 survivors out of 1000 is a power error."""
        with pytest.raises(StatisticalPowerError):
            estimate_qsd_naive(subcritical_params, 1, 0.1, 40.0, 1000, master_seed=3)

    @pytest.mark.slow
    def test_survivors_inside_invariant_set(self, linear_params):
        """Conditioned states lie in ℕ* × (0, s̄₁)."""
        estimate = estimate_qsd_naive(linear_params, 1, 0.1, 2.0, 1000, master_seed=5)
        assert np.all(estimate.xs >= 1)
        assert np.all((estimate.ss > 0) & (estimate.ss < 0.5))
        assert estimate.outside == 0
        assert estimate.total_mass == pytest.approx(1.0)

    @pytest.mark.slow
    def test_thread_independent(self, linear_params):
        """One or two workers give the same histogram."""
        serial = estimate_qsd_naive(linear_params, 1, 0.1, 1.0, 1000, 9, threads=1)
        parallel = estimate_qsd_naive(linear_params, 1, 0.1, 1.0, 1000, 9, threads=2)
        np.testing.assert_array_equal(serial.masses, parallel.masses)


class TestLambdaSurvival:
    """Test cases for estimate_lambda_survival."""

    def test_needs_four_increasing_times(self, linear_params):
        """Grids must be long and increasing."""
        with pytest.raises(PreconditionError):
            estimate_lambda_survival(linear_params, 1, 0.1, [1, 2, 3], 10_000, 1)
        with pytest.raises(PreconditionError):
            estimate_lambda_survival(linear_params, 1, 0.1, [1, 3, 2, 4], 10_000, 1)

    def test_needs_enough_paths(self, linear_params):
        """At least 10⁴ paths."""
        with pytest.raises(PreconditionError):
            estimate_lambda_survival(linear_params, 1, 0.1, [1, 2, 3, 4], 100, 1)

    @pytest.mark.slow
    def test_window_empty(self, linear_params):
        """Survival near 1 on the whole grid leaves no fit points."""
        with pytest.raises(StatisticalPowerError):
            estimate_lambda_survival(
                linear_params, 1, 0.1, [0.0, 0.001, 0.002, 0.003], 10_000, 1
            )

    @pytest.mark.slow
    def test_subcritical_rate(self, subcritical_params):
        """A positive rate with an interval around it."""
        estimate = estimate_lambda_survival(
            subcritical_params, 1, 0.1, np.arange(1.0, 13.0), 10_000, 11
        )
        assert estimate.lambda_hat > 0
        assert estimate.ci_low <= estimate.lambda_hat <= estimate.ci_high
        assert estimate.details["points"] >= 2


class TestCompactDiagnostics:
    """Test cases for compact sets and the mass-ratio diagnostic."""

    def test_compact_points(self):
        """Corners plus centre, deduplicated."""
        assert compact_points(3, 0.1, 0.4) == [
            (1, 0.1),
            (1, 0.4),
            (3, 0.1),
            (3, 0.4),
            (2, 0.25),
        ]
        assert compact_points(1, 0.1, 0.4) == [(1, 0.1), (1, 0.4), (1, 0.25)]

    def test_mass_ratio_rejects_set_outside(self, linear_params):
        """K must sit inside ℕ* × (0, s̄₁)."""
        with pytest.raises(PreconditionError):
            mass_ratio_diagnostic(linear_params, 2, 0.1, 0.6, [1, 2, 3], 10, 1)

    def test_untrended_report_is_bounded(self):
        """Without a trend fit the ratio counts as bounded."""
        report = MassRatioReport(
            points=[(1, 0.1)],
            times=[1.0],
            means=np.ones((1, 1)),
            ratios=np.ones((1, 1, 1)),
            trend_slope=math.nan,
            trend_p_value=math.nan,
        )
        assert report.bounded
        assert report.to_dict()["overall_max_ratio"] == 1.0

    def test_significant_trend_is_unbounded(self):
        """A clearly growing max ratio fails."""
        report = MassRatioReport(
            points=[(1, 0.1)],
            times=[1.0, 2.0, 3.0],
            means=np.ones((3, 1)),
            ratios=np.ones((3, 1, 1)),
            trend_slope=0.5,
            trend_p_value=0.001,
        )
        assert not report.bounded

    @pytest.mark.slow
    def test_mass_ratio_run(self, linear_params):
        """Means are positive and the diagonal ratios are one."""
        report = mass_ratio_diagnostic(
            linear_params, 2, 0.1, 0.3, [0.5, 1.0, 1.5], 200, master_seed=2
        )
        assert report.means.shape == (3, 5)
        assert np.all(report.means > 0)
        for k in range(3):
            np.testing.assert_allclose(np.diag(report.ratios[k]), 1.0)


class TestReports:
    """Test cases for Yaglom, fixed-point and h reports."""

    def test_yaglom_monotone_within_ci(self):
        """Later TVs may not exceed earlier upper bounds."""
        rows = [
            {"t": 1.0, "tv": 0.4, "ci_low": 0.3, "ci_high": 0.5},
            {"t": 2.0, "tv": 0.45, "ci_low": 0.35, "ci_high": 0.55},
            {"t": 3.0, "tv": 0.1, "ci_low": 0.05, "ci_high": 0.15},
        ]
        report = YaglomReport(((1, 0.1), (2, 0.3)), rows, 0.5, (0.3, 0.7))
        assert report.monotone_within_ci()
        np.testing.assert_allclose(report.tv(), [0.4, 0.45, 0.1])
        rows[2]["tv"] = 0.6
        assert not report.monotone_within_ci()

    def test_fixed_point_report(self):
        """Passing needs a small TV and consistent survival."""
        report = FixedPointReport(
            dt=1.0,
            tv=0.03,
            tv_noise_floor=0.02,
            survival=0.8,
            expected_survival=0.81,
            survival_ci=(0.78, 0.82),
            tv_tolerance=0.05,
        )
        assert report.passed
        assert report.to_dict()["passed"] is True
        shifted = FixedPointReport(1.0, 0.2, 0.02, 0.8, 0.9, (0.78, 0.82), 0.05)
        assert not shifted.law_preserved
        assert not shifted.survival_consistent

    def test_fixed_point_noise_floor(self):
        """A noise floor above the tolerance accepts TV up to the floor, unresolved."""
        coarse = FixedPointReport(
            1.0, 0.314, 0.347, 0.75, 0.76, (0.73, 0.77), 0.05, paths=800
        )
        assert coarse.law_preserved
        assert not coarse.resolved
        assert coarse.passed
        payload = coarse.to_dict()
        assert payload["paths"] == 800
        assert payload["resolved"] is False

    def test_h_monotone_trend(self):
        """Per-s monotonicity in x is reported."""
        values = [
            {"x": 1, "s": 0.1, "h": 1.0},
            {"x": 2, "s": 0.1, "h": 1.5},
            {"x": 1, "s": 0.3, "h": 2.0},
            {"x": 2, "s": 0.3, "h": 1.0},
        ]
        trend = h_monotone_trend(values)["nondecreasing_in_x"]
        assert trend == {0.1: True, 0.3: False}

    def test_h_over_w(self, linear_params):
        """ĥ/W is finite on interior points."""
        config = select_parameters(linear_params, rho=2.0, p=0.1)
        report = h_over_w_grid(config, [{"x": 1, "s": 0.25, "h": 7.148698}])
        assert report["bounded"]
        assert report["max_ratio"] == pytest.approx(1.0, rel=1e-5)


def yaglom_row(t, tv, noise_floor, half_width=0.05):
    return {
        "t": t,
        "tv": tv,
        "ci_low": tv - half_width,
        "ci_high": tv + half_width,
        "noise_floor": noise_floor,
    }


class TestDecayFit:
    """Test cases for the exponential fit of TV against time."""

    def test_two_points_above_floor(self):
        """Two resolved TVs give the exact rate inside its bootstrap interval."""
        omega, (low, high), flags = _decay_fit(
            [yaglom_row(1.0, 0.4, 0.1), yaglom_row(3.0, 0.1, 0.05)]
        )
        assert omega == pytest.approx(math.log(4.0) / 2)
        assert low == pytest.approx(math.log(0.35 / 0.15) / 2)
        assert high == pytest.approx(math.log(0.45 / 0.05) / 2)
        assert flags == []

    def test_falls_back_below_floor(self):
        """A later TV under its floor still yields a finite, flagged rate."""
        omega, _, flags = _decay_fit(
            [yaglom_row(1.0, 0.408, 0.2), yaglom_row(3.0, 0.244, 0.3)]
        )
        assert math.isfinite(omega)
        assert omega == pytest.approx(math.log(0.408 / 0.244) / 2)
        assert flags == [OMEGA_NOISE_FLAG]

    def test_unordered_rows(self):
        """Rows are fitted in time order."""
        rows = [yaglom_row(3.0, 0.1, 0.0), yaglom_row(1.0, 0.4, 0.0)]
        assert _decay_fit(rows)[0] == pytest.approx(math.log(4.0) / 2)

    def test_regression_on_three_points(self):
        """Exact exponential decay is recovered by the regression."""
        rows = [yaglom_row(t, 0.5 * math.exp(-0.3 * t), 0.0, 0.0) for t in (1, 2, 4)]
        omega, (low, high), _ = _decay_fit(rows)
        assert omega == pytest.approx(0.3)
        assert low == pytest.approx(0.3) and high == pytest.approx(0.3)

    def test_single_positive_tv(self):
        """One positive TV cannot fix a rate."""
        omega, _, flags = _decay_fit(
            [yaglom_row(1.0, 0.2, 0.3), yaglom_row(3.0, 0.0, 0.3, 0.0)]
        )
        assert math.isnan(omega)
        assert flags == [OMEGA_NOISE_FLAG]

    def test_yaglom_needs_two_times(self, linear_params):
        """The decay fit is refused up front on a single time."""
        with pytest.raises(PreconditionError, match="two distinct times"):
            yaglom_distance(linear_params, (1, 0.1), (4, 0.45), [5.0, 5.0], 1000, 1)


@pytest.fixture(scope="module")
def reference_params():
    return ChemostatParams(D=1.0, s_in=2.0, k=1.0, growth=LinearLaw(c=3.0))


@pytest.fixture(scope="module")
def reference_naive(reference_params):
    return estimate_qsd_naive(reference_params, 1, 0.1, 10.0, 10_000, 21, s_bins=8)


@pytest.fixture(scope="module")
def reference_lambda(reference_params):
    return estimate_lambda_survival(
        reference_params, 1, 0.1, [2.0, 4.0, 6.0, 8.0, 10.0], 10_000, 22
    )


@pytest.mark.slow
class TestReferenceModel:
    """Estimators on the Linear model μ(s) = 3s, D = 1."""

    def test_lambda_within_washout(self, reference_params, reference_lambda):
        """0 < λ̂ ≤ D with an interval clear of zero."""
        assert reference_lambda.within_washout(reference_params.D)

    def test_fleming_viot_matches_naive(self, reference_params, reference_naive):
        """The particle system and the naive estimator agree on the QSD."""
        _, estimate, fv_lambda = evolve_fleming_viot(
            reference_params,
            ParticleEnsemble.at_point(1, 0.1, 2000),
            20.0,
            23,
            binning=reference_naive.binning,
        )
        tv = total_variation(reference_naive, estimate)
        floor = tv_noise_floor(reference_naive, estimate, np.random.default_rng(24))
        assert tv <= max(0.05, floor)
        assert fv_lambda.within_washout(reference_params.D)

    def test_h_is_positive(self, reference_params, reference_lambda):
        """ĥ(1, 0.1) is positive and inside its interval."""
        value, (low, high) = estimate_h(
            reference_params, 1, 0.1, 10.0, 10_000, reference_lambda, 25
        )
        assert 0 < low < value < high
        assert math.isfinite(high)

    def test_fixed_point(self, reference_params, reference_naive, reference_lambda):
        """The naive estimate is nearly invariant over one time unit."""
        report = qsd_fixed_point_check(
            reference_params, reference_naive, reference_lambda, 1.0, 2000, 26
        )
        assert report.paths >= 2000
        assert report.law_preserved
        assert report.survival == pytest.approx(report.expected_survival, abs=0.05)

    def test_yaglom_distance_decreases(self, reference_params):
        """Laws from two starts draw together, with a finite fitted rate."""
        report = yaglom_distance(
            reference_params,
            (1, 0.1),
            (4, 0.45),
            [1.0, 5.0, 10.0],
            5000,
            27,
            s_bins=8,
        )
        assert [row["t"] for row in report.rows] == [1.0, 5.0, 10.0]
        assert report.rows[-1]["tv"] <= report.rows[0]["ci_high"]
        assert math.isfinite(report.omega_hat)
