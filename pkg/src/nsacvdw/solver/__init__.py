"""Discretization and time stepping of the Lagrangian NSAC system."""

from ..state import FarField, Grid1D, State
from .operators import chemical_potential
from .profiles import PROFILE_KINDS, init_state
from .run import SERIES_COLUMNS, RunResult, run
from .stepping import PicardReport, SimConfig, picard_step, sound_speed, step_imex
from .tridiag import solve_tridiagonal

__all__ = [
    "FarField",
    "Grid1D",
    "State",
    "SimConfig",
    "PicardReport",
    "RunResult",
    "SERIES_COLUMNS",
    "PROFILE_KINDS",
    "chemical_potential",
    "init_state",
    "picard_step",
    "run",
    "solve_tridiagonal",
    "sound_speed",
    "step_imex",
]
