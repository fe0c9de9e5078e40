"""Native LP/MIP machinery: problem container, simplex, cuts, search."""

from .problem import (
    BINARY,
    CONTINUOUS,
    EQ,
    FEASIBLE,
    GE,
    INFEASIBLE,
    INTEGER,
    LE,
    MAX,
    MIN,
    OPTIMAL,
    TIME_LIMIT,
    UNBOUNDED,
    AffineExpr,
    Constraint,
    MipError,
    MipProblem,
    Objective,
    Solution,
    Variable,
    read_lp,
    write_lp,
)
from .cuts import cover_cuts, gomory_cuts
from .solver import (
    SolveConfig,
    branch_and_bound,
    fix_variables,
    lexicographic_solve,
    lp_solve,
)

__all__ = [
    "AffineExpr",
    "BINARY",
    "CONTINUOUS",
    "Constraint",
    "EQ",
    "FEASIBLE",
    "GE",
    "INFEASIBLE",
    "INTEGER",
    "LE",
    "MAX",
    "MIN",
    "MipError",
    "MipProblem",
    "OPTIMAL",
    "Objective",
    "Solution",
    "SolveConfig",
    "TIME_LIMIT",
    "UNBOUNDED",
    "Variable",
    "branch_and_bound",
    "cover_cuts",
    "fix_variables",
    "gomory_cuts",
    "lexicographic_solve",
    "lp_solve",
    "read_lp",
    "write_lp",
]
