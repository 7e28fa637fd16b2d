"""Discrete metric measure spaces, exact quadratic transport and ABP-type estimates."""
from .mmspace import DiscreteMMSpace, Region, build_model_space, epsilon_neighborhood, validate_metric
from .transport import ProbMeasure, TransportSolution, solve_w2

__version__ = "0.1.0"

__all__ = [
    "DiscreteMMSpace", "Region", "build_model_space", "epsilon_neighborhood", "validate_metric",
    "ProbMeasure", "TransportSolution", "solve_w2",
]
