"""Sparse regularized kernel interpolation by greedy center selection."""

from .geometry import CandidateSet, fill_distance, grid_interval, grid_unit_ball, separation_distance
from .greedy import GreedyConfig, GreedyState, RunTrace, SurrogateModel, fit, predict
from .kernels import KernelSpec, kernel_eval, kernel_lambda_eval, kernel_matrix, kernel_row
from .linalg import IncrementalCholesky, NotPositiveDefinite, solve_regularized

__all__ = [
    "CandidateSet",
    "GreedyConfig",
    "GreedyState",
    "IncrementalCholesky",
    "KernelSpec",
    "NotPositiveDefinite",
    "RunTrace",
    "SurrogateModel",
    "fill_distance",
    "fit",
    "grid_interval",
    "grid_unit_ball",
    "kernel_eval",
    "kernel_lambda_eval",
    "kernel_matrix",
    "kernel_row",
    "predict",
    "separation_distance",
    "solve_regularized",
]

__version__ = "0.1.0"
