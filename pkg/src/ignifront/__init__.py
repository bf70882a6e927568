"""Front propagation and homogenization toolkit for ignition reactions in random media.

The package simulates u_t = lap(u) + f(x, u, omega) for stationary random
ignition reactions f built from a deterministic ignition profile and a random
envelope over the integer lattice, measures front speeds / arrival-time
statistics / transition widths from ensembles of such runs, solves the
effective anisotropic level-set dynamics they homogenize to, and quantifies
the homogenization error under parabolic rescaling.
"""

from ignifront.profiles import IgnitionProfile, HypothesisParams, make_profile
from ignifront.medium import RandomMedium, sample_site, eval_reaction, truncate_range
from ignifront.grids import Grid
from ignifront.fieldio import ScalarField, read_field, write_field
from ignifront.solver import (
    SolverState,
    step,
    run,
    arrival_times,
    transition_width,
    reached_set,
)
from ignifront.speedtable import SpeedTable
from ignifront.shooting import compute_c0

__version__ = "0.1.0"

__all__ = [
    "IgnitionProfile",
    "HypothesisParams",
    "make_profile",
    "RandomMedium",
    "sample_site",
    "eval_reaction",
    "truncate_range",
    "Grid",
    "ScalarField",
    "read_field",
    "write_field",
    "SolverState",
    "step",
    "run",
    "arrival_times",
    "transition_width",
    "reached_set",
    "SpeedTable",
    "compute_c0",
    "__version__",
]
