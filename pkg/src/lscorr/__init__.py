"""Local-symmetry correlators for stationary and interacting few-body quantum systems in 1D."""

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DecompositionFailure,
    DomainError,
    IntegrityError,
    LscorrError,
    SizingError,
    SymmetryViolation,
)
from .grid import Grid1D, SymmetryMap, make_grid
from .potentials import InteractionSpec, PotentialSpec, build_locally_symmetric_potential

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "ConvergenceError", "DecompositionFailure", "DomainError", "IntegrityError",
    "LscorrError", "SizingError", "SymmetryViolation",
    "Grid1D", "SymmetryMap", "make_grid",
    "InteractionSpec", "PotentialSpec", "build_locally_symmetric_potential",
]
