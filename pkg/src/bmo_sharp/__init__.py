"""Sharp constants in the BMO interpolation inequality via Bellman functions."""

__version__ = "0.1.0"

from .bellman import eval_b1, eval_b2, eval_bellman, grad_b2, leaf_coords_b1, leaf_coords_b2
from .domain import Params, Point2, Point3, SubdomainLabel, am, ak, classify_b1, classify_b2
from .errors import BmoSharpError, DomainError, NumericalError, ParameterError, RangeError
from .optimizer import TestFunction, bmo_norm, delivery_curve, moment, optimizer
from .sharp_constant import ConstantResult, constant, multidim_ball_constant, multidim_cube_constant

__all__ = [
    "Params", "Point2", "Point3", "SubdomainLabel", "am", "ak", "classify_b1", "classify_b2",
    "eval_b1", "eval_b2", "eval_bellman", "grad_b2", "leaf_coords_b1", "leaf_coords_b2",
    "TestFunction", "bmo_norm", "delivery_curve", "moment", "optimizer",
    "ConstantResult", "constant", "multidim_cube_constant", "multidim_ball_constant",
    "BmoSharpError", "DomainError", "NumericalError", "ParameterError", "RangeError",
]
