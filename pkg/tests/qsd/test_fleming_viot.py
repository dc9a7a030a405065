"""Tests for the Fleming-Viot particle system."""

import numpy as np
import pytest

from chemostat_qsd.common.errors import PreconditionError
from chemostat_qsd.model import HybridState
from chemostat_qsd.qsd import Binning, ParticleEnsemble, evolve_fleming_viot


class TestParticleEnsemble:
    """Test cases for ParticleEnsemble."""

    def test_at_point(self):
        """N copies of one state."""
        ensemble = ParticleEnsemble.at_point(2, 0.3, 5)
        assert ensemble.n == 5
        xs, ss = ensemble.arrays()
        assert np.all(xs == 2) and np.all(ss == 0.3)

    def test_rejects_extinct_particles(self):
        """Live particles only."""
        with pytest.raises(PreconditionError):
            ParticleEnsemble([HybridState(1, 0.2), HybridState(0, 0.2)])

    def test_rejects_empty(self):
        """At least one particle."""
        with pytest.raises(PreconditionError):
            ParticleEnsemble([])

    def test_rows(self):
        """One row per particle."""
        rows = ParticleEnsemble.at_point(1, 0.1, 3).to_rows()
        assert rows[2] == {"particle": 2, "x": 1, "s": 0.1}


class TestEvolveFlemingViot:
    """Test cases for evolve_fleming_viot."""

    def test_minimum_particles(self, linear_params):
        """Small ensembles are refused."""
        with pytest.raises(PreconditionError):
            evolve_fleming_viot(
                linear_params, ParticleEnsemble.at_point(1, 0.1, 50), 1.0, 1
            )

    def test_positive_time(self, linear_params):
        """t must be positive."""
        with pytest.raises(PreconditionError):
            evolve_fleming_viot(
                linear_params, ParticleEnsemble.at_point(1, 0.1, 100), 0.0, 1
            )

    @pytest.mark.slow
    def test_run(self, linear_params):
        """Particles stay alive and inside (0, s̄₁); snapshots are pooled."""
        ensemble = ParticleEnsemble.at_point(1, 0.1, 100)
        final, estimate, lam = evolve_fleming_viot(
            linear_params, ensemble, 2.0, master_seed=4, snapshots=5
        )
        xs, ss = final.arrays()
        assert final.n == 100
        assert final.time == 2.0
        assert np.all(xs >= 1)
        assert np.all((ss > 0) & (ss < 0.5))
        assert estimate.n == 500
        assert estimate.total_mass == pytest.approx(1.0)
        assert lam.ci_low <= lam.lambda_hat <= lam.ci_high
        assert final.resample_count == len(final.kill_times)

    @pytest.mark.slow
    def test_reproducible_with_fixed_binning(self, linear_params):
        """The same seed gives the same ensemble and histogram."""
        binning = Binning(s_upper=0.5, x_max=10, s_bins=16)
        runs = [
            evolve_fleming_viot(
                linear_params,
                ParticleEnsemble.at_point(1, 0.1, 100),
                1.0,
                master_seed=12,
                snapshots=3,
                binning=binning,
            )
            for _ in range(2)
        ]
        np.testing.assert_array_equal(runs[0][0].arrays()[0], runs[1][0].arrays()[0])
        np.testing.assert_array_equal(runs[0][1].masses, runs[1][1].masses)
        assert runs[0][2].lambda_hat == runs[1][2].lambda_hat
