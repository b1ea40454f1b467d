"""Galerkin spectral solver for hyperbolic Wheeler-DeWitt type equations."""
from .basis import BasisSpec, basis_matrix, basis_value, fourier_function, oscillator_eigenvalue, oscillator_function
from .quadrature import QuadratureRule, QuadratureSettings, composite, gauss_legendre, integrate_2d, trapezoid
from .assembly import GalerkinSystem, PotentialSpec, coupling_matrix, diagonal_term, f_wdw, galerkin_matrix
from .solver import (
    InitialData,
    NullSpaceBundle,
    WaveSolution,
    coherent_coefficients,
    eigenfunction_matrix,
    evaluate,
    fit_lambda,
    galerkin_residual,
    null_space,
    solve,
)
from .classical import ClassicalState, ClassicalTrajectory, initial_state, integrate, rhs
from .metrics import ErrorReport, GridField, delta, reference_k0

__all__ = [
    "BasisSpec",
    "basis_matrix",
    "basis_value",
    "fourier_function",
    "oscillator_eigenvalue",
    "oscillator_function",
    "QuadratureRule",
    "QuadratureSettings",
    "composite",
    "gauss_legendre",
    "integrate_2d",
    "trapezoid",
    "GalerkinSystem",
    "PotentialSpec",
    "coupling_matrix",
    "diagonal_term",
    "f_wdw",
    "galerkin_matrix",
    "InitialData",
    "NullSpaceBundle",
    "WaveSolution",
    "coherent_coefficients",
    "eigenfunction_matrix",
    "evaluate",
    "fit_lambda",
    "galerkin_residual",
    "null_space",
    "solve",
    "ClassicalState",
    "ClassicalTrajectory",
    "initial_state",
    "integrate",
    "rhs",
    "ErrorReport",
    "GridField",
    "delta",
    "reference_k0",
]

__version__ = "0.1.0"
