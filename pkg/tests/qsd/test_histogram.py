"""Tests for QSD histograms and distances between them."""

import numpy as np
import pytest

from chemostat_qsd.common.errors import InternalInvariantError, PreconditionError
from chemostat_qsd.qsd import (
    Binning,
    QsdEstimate,
    total_variation,
    tv_bootstrap_ci,
    tv_noise_floor,
)


def make_estimate(xs, ss, binning, method="naive"):
    return QsdEstimate.from_samples(xs, ss, binning, time=1.0, method=method)


class TestBinning:
    """Test cases for Binning."""

    def test_counts_and_overflow_row(self):
        """x above x_max lands in the overflow row; s is clipped to edge bins."""
        binning = Binning(s_upper=0.5, x_max=2, s_bins=5)
        table = binning.counts(np.array([1, 2, 7, 1]), np.array([0.05, 0.45, 0.2, 0.9]))
        assert table.shape == (3, 5)
        assert table[0, 0] == 1
        assert table[1, 4] == 1
        assert table[2, 2] == 1
        assert table[0, 4] == 1

    def test_fit_uses_quantile(self):
        """x_max is the rounded-up quantile of the sample."""
        xs = np.array([1] * 998 + [50, 60])
        binning = Binning.fit(xs, 0.5, quantile=0.99)
        assert binning.x_max == 1

    def test_edges(self):
        """s_bins + 1 equally spaced edges."""
        edges = Binning(s_upper=1.0, x_max=3, s_bins=4).edges()
        np.testing.assert_allclose(edges, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_rejects_bad_shape(self):
        """Positive s_upper, at least one row and bin."""
        with pytest.raises(PreconditionError):
            Binning(s_upper=0.0, x_max=1)
        with pytest.raises(PreconditionError):
            Binning(s_upper=1.0, x_max=0)


class TestQsdEstimate:
    """Test cases for QsdEstimate."""

    def test_masses_sum_to_one(self, rng):
        """Every sample is counted once."""
        xs = rng.integers(1, 6, size=500)
        ss = rng.uniform(0.0, 0.5, size=500)
        estimate = make_estimate(xs, ss, Binning(0.5, 4, 10))
        assert estimate.total_mass == pytest.approx(1.0)
        assert estimate.marginal_x().shape == (5,)
        assert estimate.stderr.shape == estimate.masses.shape

    def test_outside_count(self):
        """Samples outside (0, s_upper) are reported."""
        estimate = make_estimate([1, 1, 1], [0.0, 0.2, 0.6], Binning(0.5, 1, 5))
        assert estimate.outside == 2

    def test_extinct_sample_is_invariant_violation(self):
        """Conditioned samples never contain x = 0."""
        with pytest.raises(InternalInvariantError):
            make_estimate([1, 0], [0.1, 0.2], Binning(0.5, 2, 5))

    def test_empty_sample(self):
        """A histogram needs samples."""
        with pytest.raises(PreconditionError):
            make_estimate([], [], Binning(0.5, 2, 5))

    def test_rows_skip_empty_cells(self):
        """Only nonzero cells are listed."""
        estimate = make_estimate(
            [1, 1, 2, 2], [0.05, 0.05, 0.3, 0.3], Binning(0.5, 2, 5)
        )
        rows = estimate.to_rows()
        assert len(rows) == 2
        assert rows[0] == pytest.approx(
            {"x": 1, "s_bin_lo": 0.0, "s_bin_hi": 0.1, "mass": 0.5, "stderr": 0.25}
        )

    def test_draw_returns_stored_states(self, rng):
        """Resampling only returns observed states."""
        estimate = make_estimate([1, 3], [0.1, 0.4], Binning(0.5, 3, 5))
        xs, ss = estimate.draw(20, rng)
        assert set(zip(xs.tolist(), ss.tolist(), strict=True)) <= {(1, 0.1), (3, 0.4)}

    def test_summary(self):
        """The summary carries the binning and sample size."""
        summary = make_estimate([2, 4], [0.1, 0.3], Binning(0.5, 4, 5)).summary()
        assert summary["n"] == 2
        assert summary["mean_x"] == 3.0
        assert summary["binning"]["x_max"] == 4


class TestDistances:
    """Test cases for total variation and its noise references."""

    def test_identical_and_disjoint(self):
        """TV is 0 for equal laws and 1 for disjoint ones."""
        binning = Binning(0.5, 2, 5)
        a = make_estimate([1, 1], [0.05, 0.05], binning)
        b = make_estimate([2, 2], [0.45, 0.45], binning)
        assert total_variation(a, a) == 0.0
        assert total_variation(a, b) == pytest.approx(1.0)

    def test_requires_shared_binning(self):
        """Histograms on different cells are not comparable."""
        a = make_estimate([1], [0.1], Binning(0.5, 2, 5))
        b = make_estimate([1], [0.1], Binning(0.5, 3, 5))
        with pytest.raises(PreconditionError):
            total_variation(a, b)

    def test_bootstrap_and_noise_floor(self, rng):
        """Two samples of one law: the observed TV sits below a loose noise floor."""
        binning = Binning(0.5, 3, 8)
        a = make_estimate(rng.integers(1, 4, 800), rng.uniform(0, 0.5, 800), binning)
        b = make_estimate(rng.integers(1, 4, 800), rng.uniform(0, 0.5, 800), binning)
        tv, low, high = tv_bootstrap_ci(a, b, rng, resamples=100)
        assert low <= high
        assert tv == total_variation(a, b)
        floor = tv_noise_floor(a, b, rng, resamples=100, quantile=1.0)
        assert floor > 0
        assert tv < 3 * floor
