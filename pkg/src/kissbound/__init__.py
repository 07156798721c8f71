"""Certified rational upper bounds for spherical codes via semidefinite
programming: exact problem generation, solver round trip, and rigorous
rationalization of the floating answer into a provable bound."""

from .certify import CertifyResult, certify, metadata_from_config
from .orthopoly import SdpShape, jacobi, q_kernel, s_matrix, y_matrix
from .sdpbuild import (
    ProblemConfig,
    SdpProblem,
    apply_lambda_shift,
    assemble,
    delta_membership,
    delta_system,
)
from .solverio import SolverConfig, Solution, emit, parse, run
from .symmetry import symmetry_adapted_basis, v_matrices

__all__ = [
    "CertifyResult",
    "ProblemConfig",
    "SdpProblem",
    "SdpShape",
    "Solution",
    "SolverConfig",
    "apply_lambda_shift",
    "assemble",
    "certify",
    "delta_membership",
    "delta_system",
    "emit",
    "jacobi",
    "metadata_from_config",
    "parse",
    "q_kernel",
    "run",
    "s_matrix",
    "symmetry_adapted_basis",
    "v_matrices",
    "y_matrix",
]

__version__ = "0.1.0"
