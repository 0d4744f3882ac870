"""First-order boundary value problems on ``[0, 1]`` and their spectral flow."""

from .boundary import (
    BoundaryPath,
    FixedBoundary,
    FramesBoundary,
    GeneratorBoundary,
    PhaseBoundary,
    SplitBoundary,
    periodic,
)
from .flow import (
    Scenario,
    TrackingRecord,
    cauchy_gap_profile,
    maslov_side,
    perturbation_flow,
    sf_oracle,
    spectral_flow,
    track_flow,
    verify_gsff,
)
from .potentials import AffinePotential, CallablePotential, Potential, SampledPotential, TrigPotential
from .spectrum import (
    SpectrumSolver,
    WindowEdgeError,
    eigenvalue_condition,
    eigenvalues_in_window,
    fd_eigenvalues,
    phase_eigenvalues,
)
from .system import (
    FirstOrderSystem,
    boundary_symplectic,
    cauchy_data,
    symplectic_defect,
    transfer_matrices,
    transfer_matrix,
    ucp_certificate,
    ucp_check,
)

__all__ = [
    "AffinePotential",
    "BoundaryPath",
    "CallablePotential",
    "FirstOrderSystem",
    "FixedBoundary",
    "FramesBoundary",
    "GeneratorBoundary",
    "PhaseBoundary",
    "Potential",
    "SampledPotential",
    "Scenario",
    "SpectrumSolver",
    "SplitBoundary",
    "TrackingRecord",
    "TrigPotential",
    "WindowEdgeError",
    "boundary_symplectic",
    "cauchy_data",
    "cauchy_gap_profile",
    "eigenvalue_condition",
    "eigenvalues_in_window",
    "fd_eigenvalues",
    "maslov_side",
    "periodic",
    "perturbation_flow",
    "phase_eigenvalues",
    "sf_oracle",
    "spectral_flow",
    "symplectic_defect",
    "track_flow",
    "transfer_matrices",
    "transfer_matrix",
    "ucp_certificate",
    "ucp_check",
    "verify_gsff",
]
