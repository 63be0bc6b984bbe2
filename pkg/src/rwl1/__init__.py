"""Noisy sparse recovery by standard and iteratively reweighted l1 minimization."""

from .core import (MeasurementInstance, RipEstimate, SparseSignal, best_s_term,
                   estimate_ric, generate_bernoulli_matrix, generate_gaussian_matrix,
                   generate_noise, generate_sparse_signal, measure, noise_level)
from .estimators import ReweightedL1Recovery, WeightedL1Recovery
from .reweight import ReweightConfig, ReweightTrace, reweighted_l1, update_weights
from .solver import (SolverOptions, SolverResult, project_l2_ball, soft_threshold,
                     solve_weighted_l1, verify_solution)

__all__ = [
    "MeasurementInstance", "RipEstimate", "SparseSignal", "best_s_term", "estimate_ric",
    "generate_bernoulli_matrix", "generate_gaussian_matrix", "generate_noise",
    "generate_sparse_signal", "measure", "noise_level",
    "ReweightedL1Recovery", "WeightedL1Recovery",
    "ReweightConfig", "ReweightTrace", "reweighted_l1", "update_weights",
    "SolverOptions", "SolverResult", "project_l2_ball", "soft_threshold",
    "solve_weighted_l1", "verify_solution",
]

__version__ = "0.1.0"
