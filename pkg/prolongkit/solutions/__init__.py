"""Singular solutions of the model equations and their verification."""

from prolongkit.solutions.inputs import HolomorphicPair, InputFunction, antiderivative, path_integral
from prolongkit.solutions.surfaces import (
    SolutionSurface,
    build_surface,
    laplace_solution_rs,
    parabolic_solution_st,
    wave_solution_rt,
    wave_solution_xt,
)
from prolongkit.solutions.verify import VerificationReport, detect_corank, verify_integral_surface

__all__ = [
    "HolomorphicPair",
    "InputFunction",
    "SolutionSurface",
    "VerificationReport",
    "antiderivative",
    "build_surface",
    "detect_corank",
    "laplace_solution_rs",
    "parabolic_solution_st",
    "path_integral",
    "verify_integral_surface",
    "wave_solution_rt",
    "wave_solution_xt",
]
