"""LP/QP solvers and the vertex-enumeration oracle."""

from privopt.solver.active_set import kkt_residuals, solve_qp
from privopt.solver.problem import (
    ConstrainedProblem,
    ConstraintSystem,
    Linear,
    Quadratic,
    Solution,
    Status,
    problem_from_dict,
    problem_to_dict,
)
from privopt.solver.simplex import find_feasible_point, solve_lp
from privopt.solver.vertices import enumerate_vertices


def solve(problem: ConstrainedProblem, **kw) -> Solution:
    """Dispatch on the objective type."""
    if isinstance(problem.objective, Quadratic):
        return solve_qp(problem, **kw)
    return solve_lp(problem, **kw)


__all__ = [
    "ConstrainedProblem",
    "ConstraintSystem",
    "Linear",
    "Quadratic",
    "Solution",
    "Status",
    "enumerate_vertices",
    "find_feasible_point",
    "kkt_residuals",
    "problem_from_dict",
    "problem_to_dict",
    "solve",
    "solve_lp",
    "solve_qp",
]
