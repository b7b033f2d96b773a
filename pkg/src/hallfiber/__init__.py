"""Spectral toolkit for the half-plane Landau Hamiltonian with a Dirichlet edge."""

from hallfiber.errors import (
    BracketError,
    DomainError,
    PrecisionFloorError,
    SolverDisagreement,
    SolverError,
)
from hallfiber.fiber_solver import BandPoint, FiberPoint, SolverConfig

__version__ = "0.1.0"
