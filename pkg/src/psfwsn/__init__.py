"""Parameter estimation in phase-shift-and-forward wireless sensor networks."""

from psfwsn._accel import backend, set_backend
from psfwsn.network import SensorScenario, ReceivedSignal, generate_channel, generate_received
from psfwsn.estimator import (
    UnestimableError,
    EstimateReport,
    quadratic_kernel,
    ml_estimate,
    estimate_variance,
    variance_lower_bound,
    estimate_report,
)
from psfwsn.sdp import solve_diag_sdp, extract_rank_one, optimize_phases_sdp
from psfwsn.acma import acma_phases, acma_best_m
from psfwsn.baselines import all_ones_phases, conjugate_phases, optimize_gain_phase, brute_force_phases

__version__ = "0.1.0"

__all__ = [
    "backend",
    "set_backend",
    "SensorScenario",
    "ReceivedSignal",
    "generate_channel",
    "generate_received",
    "UnestimableError",
    "EstimateReport",
    "quadratic_kernel",
    "ml_estimate",
    "estimate_variance",
    "variance_lower_bound",
    "estimate_report",
    "solve_diag_sdp",
    "extract_rank_one",
    "optimize_phases_sdp",
    "acma_phases",
    "acma_best_m",
    "all_ones_phases",
    "conjugate_phases",
    "optimize_gain_phase",
    "brute_force_phases",
]
