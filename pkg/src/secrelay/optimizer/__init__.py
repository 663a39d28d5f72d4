from .fdm import (
    DirectionResult,
    LineSearchResult,
    NlpProblem,
    SolverError,
    SolverState,
    fd_gradient,
    golden_section,
    line_search,
    lp_direction,
    solve,
)
from .problems import KINDS, Constants, Solution, build_problem, coarse_grid_best, effective_est, grid_scan, solve_problem, sweep
