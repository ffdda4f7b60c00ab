"""Ground states and symplectic spectra of quadratic bosonic Hamiltonians by
unconstrained optimization over unit-triangular symplectic factorizations."""

from .core import SymmetricParam, build_pk, build_projectors, build_sigma, is_symplectic
from .cost import (
    TriangularFactors,
    covariance,
    energy_cost,
    energy_grad,
    gap_cost,
    gap_grad,
    partial_cost,
    partial_grad,
)
from .gaussian import CovarianceMatrix, SymplecticSpectrum, symplectic_spectrum
from .hamiltonian import LatticeSpec, QuadraticHamiltonian, build_qdo, from_matrix
from .optimize import ConvergenceTrace, OptimizerConfig, init_gamma_t, minimize

__all__ = [
    "CovarianceMatrix", "ConvergenceTrace", "LatticeSpec", "OptimizerConfig",
    "QuadraticHamiltonian", "SymmetricParam", "SymplecticSpectrum", "TriangularFactors",
    "build_pk", "build_projectors", "build_qdo", "build_sigma", "covariance",
    "energy_cost", "energy_grad", "from_matrix", "gap_cost", "gap_grad",
    "init_gamma_t", "is_symplectic", "minimize", "partial_cost", "partial_grad",
    "symplectic_spectrum",
]
__version__ = "0.1.0"
