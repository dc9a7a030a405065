"""
Shared fixtures: the two reference parameter sets and solver presets.
"""
import numpy as np
import pytest

from chemostat_qsd.common.rng import RngStream
from chemostat_qsd.flow import FlowSolverConfig
from chemostat_qsd.model import ChemostatParams, LinearLaw, MonodLaw


@pytest.fixture
def linear_params():
    """μ(s) = 3s, D = 1, s_in = 2, k = 1; s̄_ℓ = 2/(1 + 3ℓ)."""
    return ChemostatParams(D=1.0, s_in=2.0, k=1.0, growth=LinearLaw(c=3.0))


@pytest.fixture
def monod_params():
    """μ(s) = 5s/(1 + s), D = 1, s_in = 2, k = 1."""
    return ChemostatParams(D=1.0, s_in=2.0, k=1.0, growth=MonodLaw(m=5.0, K=1.0))


@pytest.fixture(params=["linear", "monod"])
def any_params(request, linear_params, monod_params):
    """Both reference parameter sets."""
    return linear_params if request.param == "linear" else monod_params


@pytest.fixture
def verification_solver():
    return FlowSolverConfig.for_verification()


@pytest.fixture
def simulation_solver():
    return FlowSolverConfig.for_simulation()


@pytest.fixture
def rng():
    """A fixed generator for tests that draw directly."""
    return RngStream(12345).generator()


@pytest.fixture
def case_rng():
    """Generator for randomized deterministic cases (inputs, not paths)."""
    return np.random.default_rng(2024)


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line("markers", "integration: marks tests as integration tests")
    config.addinivalue_line("markers", "performance: marks tests as performance tests")
