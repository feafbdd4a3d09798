"""Jamming covariance estimation for an IRS-aided secure link.

Modules
-------
scenario      geometry, steering vectors and line-of-sight channels
signal_model  transmit side, ideal jamming covariance, calibration, samples
estimators    SCM, rank-2 EVD, PEM-GD and PEM-AO
metrics       null-space receive beamformer, NMSE, secrecy rate, CRLB
harness       seeded Monte-Carlo sweeps, result files and benchmarks
"""

from .estimators import (METHODS, JcmEstimate, evd_estimate, pem_ao, pem_ao_c_subproblem, pem_gd,
                         scm, solve_cubic_real)
from .harness import ExperimentPlan, TrialRecord, benchmark, convergence_trace, emit_results, run_plan
from .metrics import crlb_sum, nmse, nsp_max_wfrp, secrecy_rate
from .scenario import ArraySpec, ChannelSet, NodeLayout, build_channels, steering_vector
from .signal_model import (JcmTruth, ObservationBatch, ScenarioConfig, build_scenario, calibrate,
                           ideal_jcm, make_transmit_side, sample_observations)

__version__ = "0.1.0"

__all__ = [
    "ArraySpec", "NodeLayout", "ChannelSet", "steering_vector", "build_channels",
    "ScenarioConfig", "JcmTruth", "ObservationBatch", "make_transmit_side", "ideal_jcm",
    "calibrate", "sample_observations", "build_scenario",
    "METHODS", "JcmEstimate", "scm", "evd_estimate", "pem_gd", "pem_ao", "pem_ao_c_subproblem",
    "solve_cubic_real",
    "nsp_max_wfrp", "nmse", "secrecy_rate", "crlb_sum",
    "ExperimentPlan", "TrialRecord", "run_plan", "emit_results", "convergence_trace", "benchmark",
]
