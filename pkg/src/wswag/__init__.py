"""Weighted within-and-across-group sparsity penalties and a majorization-minimization solver."""
from .numerics import (
    BlockConstantWeights,
    ConfigurationError,
    DenseWeights,
    NumericalError,
    ToeplitzWeights,
    WeightMatrix,
    magnitude,
    phase_of,
    zero_weights,
)
from .penalty import PenaltySpec, eval_block_swag, eval_weighted_swag, strict_convexity_lambda_limit
from .prox import ProxSpec, brute_force_prox, objective_D, prox_approx
from .solver import SmoothObjective, SolveReport, SolverConfig, mm_solve, objective_C

__version__ = "0.1.0"

__all__ = [
    "BlockConstantWeights",
    "ConfigurationError",
    "DenseWeights",
    "NumericalError",
    "ToeplitzWeights",
    "WeightMatrix",
    "magnitude",
    "phase_of",
    "zero_weights",
    "PenaltySpec",
    "eval_block_swag",
    "eval_weighted_swag",
    "strict_convexity_lambda_limit",
    "ProxSpec",
    "brute_force_prox",
    "objective_D",
    "prox_approx",
    "SmoothObjective",
    "SolveReport",
    "SolverConfig",
    "mm_solve",
    "objective_C",
]
