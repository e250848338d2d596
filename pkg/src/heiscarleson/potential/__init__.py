"""Grid solvers, Green functions and random-walk estimators on H^1 domains."""

from .bmo import bmo_basepoint_invariance, bmo_norm, log_distance_datum
from .grid import Grid, ScalarField, load_dump
from .harmonic import dahlberg_check, local_comparison_check
from .solve import (assemble_sublaplacian, blowup_chain, calibrate_cQ, fundamental_solution, green_function,
                    green_weighted_energy, solve_dirichlet)
from .walks import (MCValue, SpherePartition, WalkConfig, harmonic_extension_mc, harmonic_measure, simulate_exit,
                    simulate_exits)

__all__ = [
    "Grid", "ScalarField", "load_dump", "assemble_sublaplacian", "solve_dirichlet", "fundamental_solution",
    "calibrate_cQ", "green_function", "green_weighted_energy", "blowup_chain", "WalkConfig", "MCValue",
    "SpherePartition", "simulate_exit", "simulate_exits", "harmonic_extension_mc", "harmonic_measure",
    "bmo_norm", "bmo_basepoint_invariance", "log_distance_datum", "dahlberg_check", "local_comparison_check",
]
