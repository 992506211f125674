"""Least median of squares regression through minimax subproblems."""

from .bpb import BpbConfig, bpb_solve
from .chebyshev import (
    LpSolution,
    candidate_from_solution,
    check_optimality,
    equioscillation_point,
    solve_minimax,
)
from .core import (
    DEFAULT_TOL,
    CandidateFit,
    Dataset,
    LocalMinimumRecord,
    SolverReport,
    abs_residuals,
    kth_smallest,
    median_h,
    objective_fk,
    objective_lms,
)
from .oracle import brute_force_lms, brute_force_order_stat, grid_probe_local_min
from .search import (
    count_local_minima_theory,
    enumerate_local_minima,
    exhaustive_solve,
    greedy_solve,
    is_local_min,
)

__version__ = "0.1.0"
