"""
Transport Selection - non-unique weak solutions of the continuity equation

Dyadic mixing/unmixing vector fields, their truncations and smooth regularisations,
and the two distinct weak solutions the regularisations select from one initial datum.
"""

from .errors import (
    AlignmentError,
    ConfigError,
    ConstructionError,
    SelectionError,
    SingularTimeError,
    StepSizeError,
    TimeDomainError,
)
from .fields.types import FieldSpec, Orientation, Variant
from .evolution.cells import SolutionVariant, solution_grid
from .transport.solutions import PerturbedSolution
from .regularization.regularized import RegularizedSolution
from .regularization.selection import select_k, theorem_demo


__version__ = "0.1.0"
__author__ = "Transport Selection Developers"

__all__ = [
    # Main classes
    "FieldSpec",
    "SolutionVariant",
    "PerturbedSolution",
    "RegularizedSolution",

    # Operations
    "solution_grid",
    "select_k",
    "theorem_demo",

    # Types and enums
    "Orientation",
    "Variant",

    # Errors
    "AlignmentError",
    "ConfigError",
    "ConstructionError",
    "SelectionError",
    "SingularTimeError",
    "StepSizeError",
    "TimeDomainError",
]
