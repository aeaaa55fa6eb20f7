"""Safety-filter QP assembly over constraint rows.

The objective ||u - u_n||^2 plus quadratic slack penalties lands in the
QP solver's 1/2 u'Hu + f'u form; soft rows get one extra dimension each
with a diagonal weight and a +1 coefficient in their own row.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..qpcore import QpProblem, solve_qp
from ..qpcore.solver import MAX_ROWS


@dataclass(frozen=True)
class SafetyFilterProblem:
    """Assembled QP plus the bookkeeping to read it back."""

    problem: QpProblem
    n_u: int
    rows: tuple
    soft_rows: tuple


@dataclass(frozen=True)
class FilterResult:
    u: np.ndarray
    slacks: np.ndarray
    qp: "object"

    @property
    def status(self):
        return self.qp.status


def assemble_filter(u_nominal, rows, lower=None, upper=None):
    """Build the filter QP for nominal input u_nominal and given rows.

    The arrays go into the QP unvalidated: everything here is built to
    the solver's contract (diagonal positive hessian, matched shapes),
    so the constructor checks would be pure overhead on the control
    loop. Box bounds on the input enter as explicit rows right away,
    ordered finite lower bounds by dimension then finite upper bounds,
    matching the solver's own expansion; slacks stay unbounded.
    """
    u_n = np.asarray(u_nominal, dtype=float).ravel()
    n_u = u_n.size
    rows = tuple(r for r in rows if r is not None)
    m = len(rows)
    if m > MAX_ROWS:
        raise ValueError(f"row count {m} exceeds {MAX_ROWS}")
    for row in rows:
        if row.a.size != n_u:
            raise ValueError("row dimension does not match the input")
    soft_idx = tuple(i for i, r in enumerate(rows) if r.soft is not None)
    n = n_u + len(soft_idx)
    diag = np.full(n, 2.0)
    for k, i in enumerate(soft_idx):
        diag[n_u + k] = 2.0 * rows[i].soft
    hess = np.zeros((n, n))
    hess.flat[:: n + 1] = diag
    lin = np.zeros(n)
    np.multiply(u_n, -2.0, out=lin[:n_u])
    bound_rows = []
    if lower is not None:
        vals = np.broadcast_to(
            np.asarray(lower, dtype=float), (n_u,)).tolist()
        for j, val in enumerate(vals):
            if math.isfinite(val):
                bound_rows.append((j, 1.0, val))
    if upper is not None:
        vals = np.broadcast_to(
            np.asarray(upper, dtype=float), (n_u,)).tolist()
        for j, val in enumerate(vals):
            if math.isfinite(val):
                bound_rows.append((j, -1.0, -val))
    total = m + len(bound_rows)
    g_rows = np.zeros((total, n))
    offsets = np.empty(total)
    for i, row in enumerate(rows):
        g_rows[i, :n_u] = row.a
        offsets[i] = row.b
    for k, i in enumerate(soft_idx):
        g_rows[i, n_u + k] = 1.0
    for k, (j, sign, val) in enumerate(bound_rows):
        g_rows[m + k, j] = sign
        offsets[m + k] = val
    problem = QpProblem._trusted(hess, lin, g_rows, offsets, None, None,
                                 diag=diag)
    return SafetyFilterProblem(problem, n_u, rows, soft_idx)


def solve_filter(filter_problem):
    """Solve the assembled QP and split input from slack dimensions."""
    sol = solve_qp(filter_problem.problem)
    n_u = filter_problem.n_u
    return FilterResult(sol.u[:n_u].copy(), sol.u[n_u:].copy(), sol)
