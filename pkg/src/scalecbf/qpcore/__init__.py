"""Small dense strictly convex QP solver with certification."""

from .solver import QpProblem, QpSolution, expanded_rows, solve_qp

__all__ = ["QpProblem", "QpSolution", "expanded_rows", "solve_qp"]
