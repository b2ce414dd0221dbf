"""Semilinear boundary-value toolkit: forward solves, DN data, potential recovery."""

__version__ = "0.1.0"

from .domain import (  # noqa: F401
    BoundaryFunction,
    DiscreteDomain,
    GridFunction,
    boundary_function,
    build_domain,
    grid_function,
    lp_norm,
    normal_derivative,
)
from .elliptic import (  # noqa: F401
    ConvergenceError,
    SemilinearProblem,
    SmallnessError,
    SolverConfig,
    solve_poisson,
    solve_semilinear,
    norm_ratio,
)
