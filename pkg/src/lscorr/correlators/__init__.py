"""Correlator fields, collision integrals and equation-of-motion residuals."""

from .collision import CollisionField, collision_integral, collision_matrix_elements
from .fields import (
    CorrelatorField,
    CurrentField,
    correlator_field,
    kinetic_divergence_orbitals,
    kinetic_divergence_repfree,
    orbital_current,
)
from .residuals import (
    ResidualReport,
    continuity_check,
    convergence_slope,
    natural_population_rate_check,
    residual_anomalous,
    residual_canonical_total,
    residual_integral_form,
    residual_orbital,
    stationary_noninteracting_checks,
)

__all__ = [
    "CollisionField", "collision_integral", "collision_matrix_elements",
    "CorrelatorField", "CurrentField", "correlator_field", "kinetic_divergence_orbitals",
    "kinetic_divergence_repfree", "orbital_current",
    "ResidualReport", "continuity_check", "convergence_slope", "natural_population_rate_check",
    "residual_anomalous", "residual_canonical_total", "residual_integral_form", "residual_orbital",
    "stationary_noninteracting_checks",
]
