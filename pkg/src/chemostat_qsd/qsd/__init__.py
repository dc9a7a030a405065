"""Quasi-stationary distribution, extinction rate and Yaglom diagnostics."""

from .estimators import (
    FixedPointReport,
    LambdaEstimate,
    LambdaMethod,
    MassRatioReport,
    YaglomReport,
    compact_points,
    estimate_h,
    estimate_lambda_survival,
    estimate_qsd_naive,
    h_monotone_trend,
    h_over_w_grid,
    lambda_start_independence,
    mass_ratio_diagnostic,
    qsd_fixed_point_check,
    yaglom_distance,
)
from .fleming_viot import ParticleEnsemble, evolve_fleming_viot
from .histogram import (
    Binning,
    QsdEstimate,
    total_variation,
    tv_bootstrap_ci,
    tv_noise_floor,
)

__all__ = [
    "Binning",
    "FixedPointReport",
    "LambdaEstimate",
    "LambdaMethod",
    "MassRatioReport",
    "ParticleEnsemble",
    "QsdEstimate",
    "YaglomReport",
    "compact_points",
    "estimate_h",
    "estimate_lambda_survival",
    "estimate_qsd_naive",
    "evolve_fleming_viot",
    "h_monotone_trend",
    "h_over_w_grid",
    "lambda_start_independence",
    "mass_ratio_diagnostic",
    "qsd_fixed_point_check",
    "total_variation",
    "tv_bootstrap_ci",
    "tv_noise_floor",
    "yaglom_distance",
]
