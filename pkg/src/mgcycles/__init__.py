"""Multigrid cycles with Chebyshev, heavy-ball and Nesterov coarse-level
acceleration on unsmoothed-aggregation AMG hierarchies."""

from importlib.metadata import PackageNotFoundError, version

from .accelerators import (CurvatureError, chebyshev_apply, heavy_ball_apply,
                           nesterov_apply, npcg_apply, steepest_descent_init)
from .aggregation import AggregateMap, Hierarchy, Level, aggregate, build_hierarchy, build_prolongation
from .bench import ExperimentConfig, ResultRow, emit, run_suite
from .cycles import (CycleKind, CycleSpec, MultigridCycle, SolveReport, Status, cycle_apply,
                     stationary_solve, two_grid_apply)
from .poly import (Family, PolynomialSpec, SpectralBounds, ThresholdResult, cheb_T, p_eval,
                   q_eval, solve_threshold)
from .problems import Example, ProblemSpec, assemble, rhs_for, true_solution
from .smoothing import gs_backward, gs_forward
from .sparse import CoarseSolver, DimensionError, SetupError, SparseMatrix, spmv, triple_product
from .spectral import RitzEstimate, estimate_bounds, estimate_level_bounds, make_cycle

__all__ = [
    "CurvatureError",
    "chebyshev_apply",
    "heavy_ball_apply",
    "nesterov_apply",
    "npcg_apply",
    "steepest_descent_init",
    "AggregateMap",
    "Hierarchy",
    "Level",
    "aggregate",
    "build_hierarchy",
    "build_prolongation",
    "ExperimentConfig",
    "ResultRow",
    "emit",
    "run_suite",
    "CycleKind",
    "CycleSpec",
    "MultigridCycle",
    "SolveReport",
    "Status",
    "cycle_apply",
    "stationary_solve",
    "two_grid_apply",
    "Family",
    "PolynomialSpec",
    "SpectralBounds",
    "ThresholdResult",
    "cheb_T",
    "p_eval",
    "q_eval",
    "solve_threshold",
    "Example",
    "ProblemSpec",
    "assemble",
    "rhs_for",
    "true_solution",
    "gs_backward",
    "gs_forward",
    "CoarseSolver",
    "DimensionError",
    "SetupError",
    "SparseMatrix",
    "spmv",
    "triple_product",
    "RitzEstimate",
    "estimate_bounds",
    "estimate_level_bounds",
    "make_cycle",
    "__version__",
]

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
