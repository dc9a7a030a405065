"""Lyapunov functions, the generator and drift certificates."""

from .drift import (
    DriftCertificate,
    DriftGrid,
    GConstants,
    GDriftCertificate,
    LyapunovConfig,
    blf2_sandwich,
    c_rates,
    g_drift_check,
    select_g_constants,
    select_parameters,
    tail_bound,
    theta_threshold,
    verify_drift,
    zeta_t,
)
from .functions import (
    DifferentiableFunction,
    V,
    W,
    g_function,
    psi,
    psi_function,
    sandwich_constants,
    v_function,
    w_function,
)
from .generator import generator_apply, lv_components

__all__ = [
    "DifferentiableFunction",
    "DriftCertificate",
    "DriftGrid",
    "GConstants",
    "GDriftCertificate",
    "LyapunovConfig",
    "V",
    "W",
    "blf2_sandwich",
    "c_rates",
    "g_drift_check",
    "g_function",
    "generator_apply",
    "lv_components",
    "psi",
    "psi_function",
    "sandwich_constants",
    "select_g_constants",
    "select_parameters",
    "tail_bound",
    "theta_threshold",
    "verify_drift",
    "v_function",
    "w_function",
    "zeta_t",
]
