"""Simulation and verification tools for the compressible non-isentropic
Navier-Stokes/Allen-Cahn system with a van der Waals equation of state."""

# the solver package loads first: energy and solver.run import each other
from . import solver  # noqa: F401
from .eos import (
    CriticalPoint,
    IsothermAnalysis,
    Region,
    VdwParams,
    admissible_far_field,
    classify_state,
    critical_point,
    maxwell_construction,
    pressure,
    spinodal,
)
from .state import FarField, Grid1D, State

__version__ = "0.1.0"

__all__ = [
    "CriticalPoint",
    "FarField",
    "Grid1D",
    "IsothermAnalysis",
    "Region",
    "State",
    "VdwParams",
    "admissible_far_field",
    "classify_state",
    "critical_point",
    "maxwell_construction",
    "pressure",
    "spinodal",
]
