"""Finite and discretized stochastic maps, their C*-algebraic duals, and
quantum channels.
"""

from . import calgebra, choquet, finstoch, kernels, quantum
from .errors import InputFormatError, InvariantViolation, StochMapsError

__version__ = "0.1.0"

__all__ = [
    "calgebra",
    "choquet",
    "finstoch",
    "kernels",
    "quantum",
    "InputFormatError",
    "InvariantViolation",
    "StochMapsError",
]
