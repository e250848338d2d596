"""Carleson measures, cone functionals and the theorem checks."""

from .checks import (energy_identity_check, fatou_check, green_lower_bound_check, mobius_integral, thm11_check,
                     thm12_check, thm13_check, thm14_check)
from .cones import ConeSampler, nontangential_max, square_function
from .measures import CarlesonReport, MeasureRep, carleson_constant, dyadic_atoms

__all__ = [
    "MeasureRep", "CarlesonReport", "carleson_constant", "dyadic_atoms", "ConeSampler", "nontangential_max",
    "square_function", "mobius_integral", "energy_identity_check", "green_lower_bound_check", "fatou_check",
    "thm11_check", "thm12_check", "thm13_check", "thm14_check",
]
