"""Dense strictly convex quadratic programs with inequality rows.

Dual active-set method in the Goldfarb-Idnani style: start at the
unconstrained minimizer (well defined, the Hessian is positive definite
by contract), repeatedly pick the most violated row, and take mixed
primal/dual steps until it becomes active or infeasibility is proven.
Deterministic throughout; ties resolve to the lowest row index.
"""

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-10
CERT_TOL = 1e-8
MAX_ROWS = 64
_REDUCED_TOL = 1e-13


@dataclass(frozen=True)
class QpProblem:
    """min 1/2 u'Hu + f'u subject to rows u >= offsets and box bounds."""

    hessian: np.ndarray
    linear: np.ndarray
    rows: np.ndarray = None
    offsets: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.hessian, dtype=float))
        f = np.asarray(self.linear, dtype=float).ravel()
        n = f.size
        if h.shape != (n, n):
            raise ValueError("hessian/linear size mismatch")
        if not np.allclose(h, h.T, atol=1e-10 * max(1.0, np.abs(h).max())):
            raise ValueError("hessian must be symmetric")
        diag = np.diagonal(h)
        is_diag = np.count_nonzero(h - np.diag(diag)) == 0
        if is_diag:
            if np.any(diag <= 0.0):
                raise ValueError("hessian must be positive definite")
        else:
            try:
                np.linalg.cholesky(h)
            except np.linalg.LinAlgError:
                raise ValueError("hessian must be positive definite") from None
        rows = self.rows
        offs = self.offsets
        if rows is None:
            rows = np.zeros((0, n))
            offs = np.zeros(0)
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.size == 0:
            rows = rows.reshape(0, n)
        offs = np.asarray(offs, dtype=float).ravel()
        if rows.shape[1] != n or offs.size != rows.shape[0]:
            raise ValueError("row/offset shape mismatch")
        if rows.shape[0] > MAX_ROWS:
            raise ValueError(f"row count {rows.shape[0]} exceeds {MAX_ROWS}")
        object.__setattr__(self, "hessian", 0.5 * (h + h.T))
        object.__setattr__(self, "linear", f)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "offsets", offs)
        object.__setattr__(self, "_diag", diag.copy() if is_diag else None)
        for name in ("lower", "upper"):
            bound = getattr(self, name)
            if bound is not None:
                bound = np.broadcast_to(
                    np.asarray(bound, dtype=float), (n,)).copy()
            object.__setattr__(self, name, bound)

    @classmethod
    def _trusted(cls, hessian, linear, rows, offsets, lower, upper,
                 diag=None):
        """Wrap prebuilt arrays without validation.

        The caller owns the contract: float arrays of matching shapes,
        symmetric positive definite hessian, bounds already broadcast,
        diag only for an exactly diagonal hessian.
        """
        prob = object.__new__(cls)
        sets = object.__setattr__
        sets(prob, "hessian", hessian)
        sets(prob, "linear", linear)
        sets(prob, "rows", rows)
        sets(prob, "offsets", offsets)
        sets(prob, "lower", lower)
        sets(prob, "upper", upper)
        sets(prob, "_diag", diag)
        return prob

    @property
    def dim(self):
        return self.linear.size


@dataclass(frozen=True)
class QpSolution:
    """Certified solve outcome.

    active and multipliers index the expanded row list: supplied rows
    first, then finite lower bounds by dimension, then finite upper
    bounds. certificate is the positive Farkas gap on infeasible returns
    and 0.0 otherwise.
    """

    u: np.ndarray
    status: str
    active: tuple = ()
    multipliers: np.ndarray = None
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    comp_residual: float = 0.0
    certificate: float = 0.0
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == "optimal"


def expanded_rows(prob):
    """Supplied rows plus box bounds rewritten as inequality rows."""
    if prob.lower is None and prob.upper is None:
        return prob.rows, prob.offsets
    n = prob.dim
    blocks = [prob.rows]
    offs = [prob.offsets]
    eye = np.eye(n)
    if prob.lower is not None:
        keep = np.isfinite(prob.lower)
        blocks.append(eye[keep])
        offs.append(prob.lower[keep])
    if prob.upper is not None:
        keep = np.isfinite(prob.upper)
        blocks.append(-eye[keep])
        offs.append(-prob.upper[keep])
    return np.vstack(blocks), np.concatenate(offs)


def _certify(prob, rows, offs, u, lam, active, iterations, status_cap):
    slack = rows @ u - offs if rows.size else np.zeros(0)
    primal = float(max(0.0, -slack.min())) if slack.size else 0.0
    grad = prob.hessian @ u + prob.linear
    if rows.size:
        grad = grad - rows.T @ lam
    dual = float(np.abs(grad).max()) if grad.size else 0.0
    comp = float(np.abs(lam * slack).max()) if slack.size else 0.0
    ok = primal <= CERT_TOL and dual <= CERT_TOL and comp <= CERT_TOL
    return QpSolution(u=u, status="optimal" if ok else status_cap,
                      active=tuple(active), multipliers=lam,
                      primal_residual=primal, dual_residual=dual,
                      comp_residual=comp, iterations=iterations)


def _hess_solver(prob):
    """Shared solve-against-H closure; diagonal H skips LAPACK."""
    diag = getattr(prob, "_diag", None)
    if diag is not None:
        def solve(v):
            return (v.T / diag).T
        return solve
    hess = prob.hessian

    def solve(v):
        return np.linalg.solve(hess, v)
    return solve


def _solve_small(mat, vec):
    """k by k linear solve with closed forms for k <= 2."""
    k = vec.shape[0]
    if k == 1:
        m = mat[0, 0]
        if m != 0.0:
            return np.array([vec[0] / m])
    elif k == 2:
        det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
        if det != 0.0:
            v0 = vec[0]
            v1 = vec[1]
            return np.array([(mat[1, 1] * v0 - mat[0, 1] * v1) / det,
                             (mat[0, 0] * v1 - mat[1, 0] * v0) / det])
    return np.linalg.solve(mat, vec)


def solve_qp(prob):
    """Solve the QP; status is optimal, infeasible, or iteration_limit."""
    if not isinstance(prob, QpProblem):
        raise TypeError("solve_qp expects a QpProblem")
    h_solve = _hess_solver(prob)
    rows, offs = expanded_rows(prob)
    n = prob.dim
    m = rows.shape[0]
    u = h_solve(-prob.linear)
    lam = np.zeros(m)
    active = []
    if m == 0:
        return _certify(prob, rows, offs, u, lam, active, 0, "optimal")
    cap = 10 * (n + m)
    pivots = 0
    while pivots < cap:
        viol = offs - rows @ u
        cand = int(np.argmax(viol))
        if viol[cand] <= FEAS_TOL:
            sol = _certify(prob, rows, offs, u, lam, active, pivots,
                           "iteration_limit")
            if sol.optimal:
                return sol
            u, lam = _polish(h_solve, prob.linear, rows, offs, u, lam,
                             active)
            return _certify(prob, rows, offs, u, lam, active, pivots,
                            "iteration_limit")
        normal = rows[cand]
        while pivots < cap:
            pivots += 1
            h_n = h_solve(normal)
            if active:
                nmat = rows[active].T
                h_nmat = h_solve(nmat)
                small = nmat.T @ h_nmat
                r = _solve_small(small, nmat.T @ h_n)
                z = h_n - h_nmat @ r
            else:
                r = np.zeros(0)
                z = h_n
            curv = float(normal @ z)
            if r.size and np.any(r > 0.0):
                ratios = np.full(r.size, np.inf)
                pos = r > 0.0
                ratios[pos] = lam[active][pos] / r[pos]
                j = int(np.argmin(ratios))
                t_dual = float(ratios[j])
            else:
                j = -1
                t_dual = np.inf
            s = float(normal @ u - offs[cand])
            t_full = -s / curv if curv > _REDUCED_TOL * (normal @ normal) \
                else np.inf
            t = min(t_dual, t_full)
            if not np.isfinite(t):
                gap = float(offs[cand] - r @ offs[active]) if r.size \
                    else float(offs[cand])
                return QpSolution(
                    u=u, status="infeasible", active=tuple(active),
                    multipliers=lam, primal_residual=float(viol[cand]),
                    certificate=gap, iterations=pivots)
            if np.isfinite(t_full):
                u = u + t * z
            if r.size:
                lam[active] -= t * r
            lam[cand] += t
            if t == t_full:
                active.append(cand)
                break
            dropped = active.pop(j)
            lam[dropped] = 0.0
    sol = _certify(prob, rows, offs, u, lam, active, cap, "iteration_limit")
    if sol.optimal:
        return sol
    u, lam = _polish(h_solve, prob.linear, rows, offs, u, lam, active)
    return _certify(prob, rows, offs, u, lam, active, cap, "iteration_limit")


def _polish(h_solve, lin, rows, offs, u, lam, active):
    """Equality re-solve on the final active set to strip drift.

    Solves the KKT system in reduced form: the Schur complement over
    the active normals gives the multipliers, then one more H solve
    recovers the primal point.
    """
    if not active:
        return u, lam
    nmat = rows[active].T
    hinv_n = h_solve(nmat)
    hinv_f = h_solve(lin)
    small = nmat.T @ hinv_n
    rhs = offs[active] + nmat.T @ hinv_f
    try:
        mult = _solve_small(small, rhs)
    except np.linalg.LinAlgError:
        return u, lam
    if not np.all(np.isfinite(mult)):
        return u, lam
    u_new = hinv_n @ mult - hinv_f
    lam_new = lam.copy()
    lam_new[active] = np.maximum(mult, 0.0)
    slack = rows @ u_new - offs
    if slack.min() < -FEAS_TOL or mult.min() < -1e-9:
        return u, lam
    return u_new, lam_new
