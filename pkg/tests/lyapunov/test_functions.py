"""Tests for ψ, W, V, g and the generator."""

import math

import numpy as np
import pytest

from chemostat_qsd.common.errors import ConfigurationError, DomainError
from chemostat_qsd.lyapunov import (
    DifferentiableFunction,
    LyapunovConfig,
    V,
    W,
    g_function,
    generator_apply,
    lv_components,
    psi,
    psi_function,
    sandwich_constants,
    select_parameters,
    v_function,
    w_function,
)


@pytest.fixture
def linear_config(linear_params):
    return select_parameters(linear_params, rho=2.0, p=0.1)


class TestW:
    """Test cases for W_{ρ,p}."""

    def test_reference_value(self):
        """ρ=2, p=0.1, s̄₁=1/2 at (1, 1/4): 2 + 4 + 2^0.2."""
        config = LyapunovConfig(
            rho=2.0, p=0.1, alpha=1.0, theta=15.4, eta=1.1, zeta=None, s_bar_1=0.5
        )
        assert W(config, 1, 0.25) == pytest.approx(7.148698, abs=1e-6)

    @pytest.mark.parametrize("x, s", [(0, 0.25), (1, 0.0), (1, 0.5), (2, 0.7)])
    def test_domain(self, x, s):
        """W lives on ℕ* × (0, s̄₁)."""
        config = LyapunovConfig(
            rho=2.0, p=0.1, alpha=1.0, theta=15.4, eta=1.1, zeta=None, s_bar_1=0.5
        )
        with pytest.raises(DomainError):
            W(config, x, s)

    def test_derivative_matches_differences(self, linear_config):
        """The analytic s-derivative agrees with central differences."""
        w = w_function(linear_config)
        s, h = 0.3, 1e-6
        numeric = (w(2, s + h) - w(2, s - h)) / (2 * h)
        assert w.ds(2, s) == pytest.approx(numeric, rel=1e-6)


class TestV:
    """Test cases for V."""

    def test_dominates_psi(self, linear_config):
        """1 ≤ ψ ≤ V on the interior."""
        s = np.linspace(0.01, 0.49, 50)
        for x in (1, 2, 5):
            assert np.all(V(linear_config, x, s) >= psi(x))

    def test_sandwich(self, linear_config):
        """c_low·W ≤ V ≤ c_high·W."""
        c_low, c_high = sandwich_constants(linear_config)
        s = np.linspace(0.001, 0.499, 200)
        for x in (1, 2, 3, 10):
            v, w = V(linear_config, x, s), W(linear_config, x, s)
            assert np.all(c_low * w <= v * (1 + 1e-12))
            assert np.all(v <= c_high * w * (1 + 1e-12))

    def test_derivative_matches_differences(self, linear_config):
        """The analytic s-derivative agrees with central differences."""
        v = v_function(linear_config)
        s, h = 0.2, 1e-6
        for x in (1, 2):
            numeric = (v(x, s + h) - v(x, s - h)) / (2 * h)
            assert v.ds(x, s) == pytest.approx(numeric, rel=1e-6)


class TestPsi:
    """Test cases for ψ."""

    def test_value(self):
        """ψ(x, s) = x and ψ(0, s) = 0."""
        assert psi(3, 0.2) == 3.0
        assert psi(0) == 0.0

    def test_negative(self):
        """Negative populations are outside the domain."""
        with pytest.raises(DomainError):
            psi(-1)


class TestGenerator:
    """Test cases for generator_apply."""

    def test_psi(self, any_params):
        """Lψ(x, s) = (μ(s) - D)x."""
        s = np.linspace(0.0, 2.0, 9)
        expected = (any_params.growth.eval(s) - any_params.D) * 3
        np.testing.assert_allclose(
            generator_apply(any_params, psi_function(), 3, s), expected, atol=1e-12
        )

    def test_extinct_row_is_flow_only(self, linear_params):
        """At x = 0 only the transport term remains."""
        g = g_function(beta=0.5, delta0=0.2, delta1=1.0)
        s = 0.7
        expected = linear_params.drift(0, s) * g.ds(0, s)
        assert generator_apply(linear_params, g, 0, s) == pytest.approx(expected)

    def test_matches_closed_forms(self, linear_params, linear_config):
        """LV equals LV₀ + LV₁ + LV₂ on every row, x = 1 and 2 included."""
        v = v_function(linear_config)
        s = np.linspace(0.01, 0.49, 25)
        for x in (1, 2, 3, 7):
            parts = lv_components(linear_params, linear_config, x, s)
            np.testing.assert_allclose(
                generator_apply(linear_params, v, x, s),
                parts["LV0"] + parts["LV1"] + parts["LV2"],
                rtol=1e-10,
            )

    def test_refuses_missing_derivative(self, linear_params):
        """No finite differencing."""
        f = DifferentiableFunction(name="f", value=lambda x, s: x * s)
        with pytest.raises(ConfigurationError):
            generator_apply(linear_params, f, 1, 0.3)

    def test_domain(self, linear_params):
        """Negative arguments are rejected."""
        with pytest.raises(DomainError):
            generator_apply(linear_params, psi_function(), -1, 0.3)
        with pytest.raises(DomainError):
            generator_apply(linear_params, psi_function(), 1, -0.3)

    def test_scalar_result(self, linear_params):
        """Scalar input gives a float."""
        assert isinstance(generator_apply(linear_params, psi_function(), 2, 0.3), float)


class TestGFunction:
    """Test cases for g."""

    def test_weights(self):
        """Row weights δ₀, 1 + δ₁ and 1."""
        g = g_function(beta=0.0, delta0=0.25, delta1=2.0)
        assert g(0, 1.0) == 0.25
        assert g(1, 1.0) == 3.0
        assert g(4, 1.0) == 1.0

    def test_exponential_in_s(self):
        """g(x, s) grows like e^{βs}."""
        g = g_function(beta=2.0, delta0=0.5, delta1=1.0)
        assert g(3, 0.5) == pytest.approx(math.e)
        assert g.ds(3, 0.5) == pytest.approx(2 * math.e)
