"""Exact simulation of the hybrid process and replica ensembles."""

from .coupling import CoupledPath, simulate_yule_coupled
from .engine import (
    SIMULATION_CONFIG,
    StepResult,
    default_rate_bound,
    dynkin_residual_psi,
    extinction_time,
    first_event_split,
    first_event_survival,
    hitting_time_box,
    hitting_time_level,
    segment_growth_integral,
    simulate_path,
    step,
)
from .ensemble import THREADS_ENV, batch_means, resolve_threads, run_replicas
from ..common.rng import RngStream
from .events import JumpEvent, JumpKind, Outcome, StoppingTime, Trajectory

__all__ = [
    "SIMULATION_CONFIG",
    "THREADS_ENV",
    "CoupledPath",
    "RngStream",
    "JumpEvent",
    "JumpKind",
    "Outcome",
    "StepResult",
    "StoppingTime",
    "Trajectory",
    "batch_means",
    "default_rate_bound",
    "dynkin_residual_psi",
    "extinction_time",
    "first_event_split",
    "first_event_survival",
    "hitting_time_box",
    "hitting_time_level",
    "resolve_threads",
    "run_replicas",
    "segment_growth_integral",
    "simulate_path",
    "simulate_yule_coupled",
    "step",
]
