"""Thin-film (lubrication limit) flow of Carreau fluids.

The package solves the nonlinear Reynolds equation for the film pressure,
reconstructs velocity profiles and filtration velocities, and ships
independent oracles used to verify the numerics.
"""

from .constitutive import FluidParams, ViscosityBranch, carreau_viscosity, psi, stress_map, tau_of_zeta
from .errors import (
    BranchError,
    CarreauFilmError,
    ConfigError,
    InvalidParameterError,
    NumericalError,
    PsiConvergenceError,
    QuadratureError,
    SingularSystemError,
)
from .fields import ForcingField, GapField, Grid2D, PressureField
from .mobility import mobility, profile_integral
from .quadrature import QuadratureSpec
from .reconstruction import FluxField, VelocityField3D, divergence_check, filtration_velocity, reconstruct_velocity
from .reynolds import SolverConfig, SolverReport, driving_field, face_flux, residual_norm, solve_pressure

__version__ = "0.1.0"

__all__ = [
    "BranchError", "CarreauFilmError", "ConfigError", "FluidParams", "FluxField", "ForcingField",
    "GapField", "Grid2D", "InvalidParameterError", "NumericalError", "PressureField",
    "PsiConvergenceError", "QuadratureError", "QuadratureSpec", "SingularSystemError", "SolverConfig",
    "SolverReport", "VelocityField3D", "ViscosityBranch", "carreau_viscosity", "divergence_check",
    "driving_field", "face_flux", "filtration_velocity", "mobility", "profile_integral", "psi",
    "reconstruct_velocity", "residual_norm", "solve_pressure", "stress_map", "tau_of_zeta",
]
