"""Correlation harvesting by uniformly accelerated Unruh-DeWitt detectors."""
from .wightman import (Flavor, KernelEvaluationError, Motion, PairConfig, TrajectoryParams,
                       circular_derived, eval_pair, eval_single)
from .quad import QuadResult, QuadSpec, QuadratureError
from .response import (DetectorParams, effective_temperature, response_function,
                       transition_probability)

__all__ = [
    "Flavor", "KernelEvaluationError", "Motion", "PairConfig", "TrajectoryParams",
    "circular_derived", "eval_pair", "eval_single", "QuadResult", "QuadSpec",
    "QuadratureError", "DetectorParams", "effective_temperature", "response_function",
    "transition_probability",
]
