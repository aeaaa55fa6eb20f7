"""Solvers for the minimal scaling of A subject to membership in B.

The optimum alpha* = min F_A(p) over {F_B(p) <= 1} measures how much A
must be magnified before touching B; alpha* > 1 means the sets are
disjoint. Dispatch:

  ellipsoid-ellipsoid   eigenvalue closed form on a 2n x 2n matrix
  ellipsoid-halfspace   one-constraint projection closed form
  ellipsoid-polytope    damped Newton on the KKT system

When the unconstrained minimizer of F_A already satisfies F_B <= 1 the
constraint is inactive and the solution (alpha* < 1, multiplier 0) is
returned directly; callers read alpha* <= 1 as overlap.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import Ellipsoid, Halfspace, eval_scaling
from .pair import PrimitivePair

TOL_KKT = 1e-10
_NEWTON_TARGET = 5e-14


class SolverFailureError(RuntimeError):
    """Newton did not reach the KKT tolerance; carries the last residual."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (last KKT residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class MinScalingSolution:
    """Optimal scaling with its touching point and KKT certificate."""

    alpha: float
    point: np.ndarray
    multiplier: float
    kkt_residual: float
    solver_tag: str
    iterations: int = 0


def world_ellipsoid(prim, frame):
    """World-frame (shape, center) of a body ellipsoid under a frame.

    Valid for any invertible frame rotation, which matters for ambient
    quaternion derivatives taken off the unit sphere. 2D angles always
    give an orthogonal rotation, where inv(R^T) is R itself.
    """
    rot = frame.rotation()
    shape = rot @ prim.shape @ rot.T
    if frame.dim == 2:
        center = frame.origin + rot @ prim.center
    else:
        center = frame.origin + np.linalg.solve(rot.T, prim.center)
    return 0.5 * (shape + shape.T), center


def world_halfspace(prim, frame):
    """World-frame (normal, offset) of a body halfspace under a frame."""
    rot = frame.rotation()
    normal = rot @ prim.normal
    return normal, prim.offset - normal @ frame.origin


def world_body_minimizer(prim, frame):
    """World point minimizing the primitive's scaling function."""
    rot = frame.rotation()
    body = prim.center if isinstance(prim, Ellipsoid) else prim.interior_point()
    if frame.dim == 2:
        origin = frame.origin
        b0 = float(body[0])
        b1 = float(body[1])
        return np.array([
            float(origin[0]) + float(rot[0, 0]) * b0 + float(rot[0, 1]) * b1,
            float(origin[1]) + float(rot[1, 0]) * b0 + float(rot[1, 1]) * b1,
        ])
    return frame.origin + np.linalg.solve(rot.T, body)


def _kkt_residual(pair, p, lam):
    ja = eval_scaling(pair.prim_a, pair.frame_a, p, 1)
    jb = eval_scaling(pair.prim_b, pair.frame_b, p, 1)
    stat = np.max(np.abs(ja.dFdp + lam * jb.dFdp))
    return max(stat, abs(jb.value - 1.0))


def _finish(pair, p, tag, iterations=0):
    """Common epilogue: evaluate alpha*, recover the multiplier, certify."""
    ja = eval_scaling(pair.prim_a, pair.frame_a, p, 1)
    jb = eval_scaling(pair.prim_b, pair.frame_b, p, 1)
    denom = jb.dFdp @ jb.dFdp
    lam = float(-(jb.dFdp @ ja.dFdp) / denom) if denom > 0 else 0.0
    stat = np.max(np.abs(ja.dFdp + lam * jb.dFdp))
    residual = max(stat, abs(jb.value - 1.0))
    return MinScalingSolution(alpha=float(ja.value), point=p,
                              multiplier=lam, kkt_residual=float(residual),
                              solver_tag=tag, iterations=iterations)


def _rimon_2d(pair):
    """Planar specialization of the eigenvalue closed form.

    Same algebra as the general branch with the 2x2 Cholesky factors,
    triangular inverses and resolvent expanded to scalars; only the 4x4
    eigenvalue call stays in LAPACK. Returns None when a guard trips so
    the caller can fall back to Newton.
    """
    fa, fb = pair.frame_a, pair.frame_b
    ra = fa.rotation()
    rb = fb.rotation()
    sa = pair.prim_a.shape
    sb = pair.prim_b.shape
    r00, r01, r10, r11 = ra[0, 0], ra[0, 1], ra[1, 0], ra[1, 1]
    s00, s01, s11 = sa[0, 0], sa[0, 1], sa[1, 1]
    t00 = r00 * s00 + r01 * s01
    t01 = r00 * s01 + r01 * s11
    t10 = r10 * s00 + r11 * s01
    t11 = r10 * s01 + r11 * s11
    a00 = t00 * r00 + t01 * r01
    a01 = t00 * r10 + t01 * r11
    a11 = t10 * r10 + t11 * r11
    ca = pair.prim_a.center
    mua0 = fa.origin[0] + r00 * ca[0] + r01 * ca[1]
    mua1 = fa.origin[1] + r10 * ca[0] + r11 * ca[1]
    r00, r01, r10, r11 = rb[0, 0], rb[0, 1], rb[1, 0], rb[1, 1]
    s00, s01, s11 = sb[0, 0], sb[0, 1], sb[1, 1]
    t00 = r00 * s00 + r01 * s01
    t01 = r00 * s01 + r01 * s11
    t10 = r10 * s00 + r11 * s01
    t11 = r10 * s01 + r11 * s11
    b00 = t00 * r00 + t01 * r01
    b01 = t00 * r10 + t01 * r11
    b11 = t10 * r10 + t11 * r11
    cb = pair.prim_b.center
    mub0 = fb.origin[0] + r00 * cb[0] + r01 * cb[1]
    mub1 = fb.origin[1] + r10 * cb[0] + r11 * cb[1]

    try:
        la11 = math.sqrt(a00)
        la21 = a01 / la11
        la22 = math.sqrt(a11 - la21 * la21)
        # inv_a = inv(L_A), lower triangular
        ia11 = 1.0 / la11
        ia21 = -la21 / (la11 * la22)
        ia22 = 1.0 / la22
        # bar_b = inv_a shape_b inv_a^T
        u00 = ia11 * b00
        u01 = ia11 * b01
        u10 = ia21 * b00 + ia22 * b01
        u11 = ia21 * b01 + ia22 * b11
        bb00 = u00 * ia11
        bb01 = u00 * ia21 + u01 * ia22
        bb11 = u10 * ia21 + u11 * ia22
        # bar_mu = L_A^T (mu_b - mu_a)
        d0 = mub0 - mua0
        d1 = mub1 - mua1
        bm0 = la11 * d0 + la21 * d1
        bm1 = la22 * d1
        mb11 = math.sqrt(bb00)
        mb21 = bb01 / mb11
        mb22 = math.sqrt(bb11 - mb21 * mb21)
        ib11 = 1.0 / mb11
        ib21 = -mb21 / (mb11 * mb22)
        ib22 = 1.0 / mb22
        c00 = ib11 * ib11
        c01 = ib11 * ib21
        c11 = ib21 * ib21 + ib22 * ib22
        mt0 = ib11 * bm0
        mt1 = ib21 * bm0 + ib22 * bm1
    except (ValueError, ZeroDivisionError):
        return None

    big = np.empty((4, 4))
    big[0, 0] = c00
    big[0, 1] = c01
    big[0, 2] = -1.0
    big[0, 3] = 0.0
    big[1, 0] = c01
    big[1, 1] = c11
    big[1, 2] = 0.0
    big[1, 3] = -1.0
    big[2, 0] = -mt0 * mt0
    big[2, 1] = -mt0 * mt1
    big[2, 2] = c00
    big[2, 3] = c01
    big[3, 0] = -mt0 * mt1
    big[3, 1] = -mt1 * mt1
    big[3, 2] = c01
    big[3, 3] = c11
    eigvals = np.linalg.eigvals(big).tolist()
    radius = 0.0
    for z in eigvals:
        radius = max(radius, abs(z))
    tol = 1e-9 * max(radius, 1.0)
    lam_min = math.inf
    for z in eigvals:
        if abs(z.imag) <= tol:
            lam_min = min(lam_min, z.real)
    if not math.isfinite(lam_min):
        return None

    # Resolvent w = (lam I - ctil)^{-1} mu_til by the adjugate formula.
    e00 = lam_min - c00
    e11 = lam_min - c11
    det = e00 * e11 - c01 * c01
    if det == 0.0:
        return None
    w0 = (e11 * mt0 + c01 * mt1) / det
    w1 = (c01 * mt0 + e00 * mt1) / det
    # On the true eigenvalue ||w|| = 1; drift means the resolvent was too
    # close to singular for the triangular algebra to be trusted.
    nrm = math.hypot(w0, w1)
    if not math.isfinite(nrm) or abs(nrm - 1.0) > 1e-6:
        return None
    y0 = bm0 + ib11 * w0 + ib21 * w1
    y1 = bm1 + ib22 * w1
    p0 = mua0 + ia11 * y0 + ia21 * y1
    p1 = mua1 + ia22 * y1
    return np.array([p0, p1])


def rimon_closed_form(pair):
    """Ellipsoid-ellipsoid minimal scaling via one eigenvalue problem.

    Whitening A turns the problem into minimizing ||y||^2 on the boundary
    of a transformed B-ellipsoid; the stationarity family y(t) meets the
    boundary exactly at real eigenvalues of a 2n x 2n companion matrix
    built from Cholesky factors, and the smallest real one is the
    touching point. Falls back to the Newton solver when the spectrum
    misbehaves or the resolvent is near singular.
    """
    if pair.dim == 2:
        p_star = _rimon_2d(pair)
        if p_star is None:
            return newton_kkt(pair)
        return _finish(pair, p_star, "closed_form")

    shape_a, mu_a = world_ellipsoid(pair.prim_a, pair.frame_a)
    shape_b, mu_b = world_ellipsoid(pair.prim_b, pair.frame_b)
    dim = mu_a.shape[0]
    eye = np.eye(dim)
    chol_a = np.linalg.cholesky(shape_a)
    inv_a = np.linalg.solve(chol_a, eye)
    # bar_b = inv(L_A) shape_b inv(L_A)^T
    bar_b = inv_a @ shape_b @ inv_a.T
    bar_b = 0.5 * (bar_b + bar_b.T)
    bar_mu = chol_a.T @ (mu_b - mu_a)
    chol_b = np.linalg.cholesky(bar_b)
    inv_b = np.linalg.solve(chol_b, eye)
    ctil = inv_b @ inv_b.T
    ctil = 0.5 * (ctil + ctil.T)
    mu_til = inv_b @ bar_mu

    big = np.zeros((2 * dim, 2 * dim))
    big[:dim, :dim] = ctil
    big[dim:, dim:] = ctil
    big[:dim, dim:] = -np.eye(dim)
    big[dim:, :dim] = -np.outer(mu_til, mu_til)
    eigvals = np.linalg.eigvals(big)
    radius = np.max(np.abs(eigvals))
    real_mask = np.abs(eigvals.imag) <= 1e-9 * max(radius, 1.0)
    if not np.any(real_mask):
        return newton_kkt(pair)
    lam_min = float(np.min(eigvals[real_mask].real))

    shifted = lam_min * np.eye(dim) - ctil
    try:
        w = np.linalg.solve(shifted, mu_til)
    except np.linalg.LinAlgError:
        return newton_kkt(pair)
    # On the true eigenvalue ||w|| = 1; drift means the resolvent was too
    # close to singular for the triangular algebra to be trusted.
    if not np.isfinite(w).all() or abs(np.linalg.norm(w) - 1.0) > 1e-6:
        return newton_kkt(pair)
    y = bar_mu + inv_b.T @ w
    p_star = mu_a + inv_a.T @ y
    return _finish(pair, p_star, "closed_form")


def _halfspace_constraint_solution(pair):
    """A is an ellipsoid, B a halfspace: project the center on the slab."""
    shape, mu = world_ellipsoid(pair.prim_a, pair.frame_a)
    normal, offset = world_halfspace(pair.prim_b, pair.frame_b)
    margin = normal @ mu + offset - 1.0
    if margin <= 0.0:
        return _finish(pair, mu.copy(), "closed_form")
    pinv_a = np.linalg.solve(shape, normal)
    quad = normal @ pinv_a
    p_star = mu - (margin / quad) * pinv_a
    return _finish(pair, p_star, "closed_form")


def _halfspace_objective_solution(pair):
    """A is a halfspace, B an ellipsoid: support point of B against A."""
    shape, mu = world_ellipsoid(pair.prim_b, pair.frame_b)
    normal, _ = world_halfspace(pair.prim_a, pair.frame_a)
    pinv = np.linalg.solve(shape, normal)
    scale = np.sqrt(normal @ pinv)
    p_star = mu - pinv / scale
    return _finish(pair, p_star, "closed_form")


def _default_newton_init(pair):
    """Boundary-crossing start: walk from B's deepest point toward A's
    minimizer until F_B = 1, then scale the multiplier by gradient norms."""
    inner = world_body_minimizer(pair.prim_b, pair.frame_b)
    target = world_body_minimizer(pair.prim_a, pair.frame_a)
    direction = target - inner
    if np.linalg.norm(direction) < 1e-12:
        direction = np.zeros_like(inner)
        direction[0] = 1.0

    def constraint(t):
        return eval_scaling(pair.prim_b, pair.frame_b,
                            inner + t * direction, 0).value - 1.0

    hi = 1.0
    for _ in range(60):
        if constraint(hi) >= 0.0:
            break
        hi *= 2.0
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if constraint(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    p0 = inner + hi * direction
    ja = eval_scaling(pair.prim_a, pair.frame_a, p0, 1)
    jb = eval_scaling(pair.prim_b, pair.frame_b, p0, 1)
    norm_b = np.linalg.norm(jb.dFdp)
    lam0 = np.linalg.norm(ja.dFdp) / norm_b if norm_b > 1e-12 else 1.0
    return p0, max(lam0, 1e-8)


def newton_kkt(pair, init=None, max_iter=100):
    """Damped Newton on the KKT system [stationarity; boundary residual].

    Unknowns are (p, lambda). Backtracking halves the step under an
    Armijo decrease test on the residual norm and rejects nonpositive
    multiplier trials. A caller-supplied init that strands the line
    search (the residual norm has spurious local minima far from the
    optimum) triggers one deterministic restart from the default init
    before SolverFailureError is raised.
    """
    if init is None:
        p, lam = _default_newton_init(pair)
        return _newton_iterate(pair, p, lam, max_iter)
    p = np.asarray(init[0], dtype=float).copy()
    try:
        return _newton_iterate(pair, p, float(init[1]), max_iter)
    except SolverFailureError:
        p, lam = _default_newton_init(pair)
        return _newton_iterate(pair, p, lam, max_iter)


def _newton_iterate(pair, p, lam, max_iter):
    dim = pair.dim

    def residual_vec(p_cur, lam_cur):
        ja = eval_scaling(pair.prim_a, pair.frame_a, p_cur, 2)
        jb = eval_scaling(pair.prim_b, pair.frame_b, p_cur, 2)
        res = np.concatenate([ja.dFdp + lam_cur * jb.dFdp,
                              [jb.value - 1.0]])
        return res, ja, jb

    res, ja, jb = residual_vec(p, lam)
    res_norm = np.linalg.norm(res)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if res_norm <= _NEWTON_TARGET:
            break
        kkt = np.zeros((dim + 1, dim + 1))
        kkt[:dim, :dim] = ja.d2Fdp2 + lam * jb.d2Fdp2
        kkt[:dim, dim] = jb.dFdp
        kkt[dim, :dim] = jb.dFdp
        try:
            step = np.linalg.solve(kkt, -res)
        except np.linalg.LinAlgError:
            raise SolverFailureError("singular KKT matrix", float(res_norm))
        t = 1.0
        accepted = False
        for _ in range(30):
            p_try = p + t * step[:dim]
            lam_try = lam + t * step[dim]
            if lam_try <= 0.0:
                t *= 0.5
                continue
            res_try, ja_try, jb_try = residual_vec(p_try, lam_try)
            norm_try = np.linalg.norm(res_try)
            if norm_try <= (1.0 - 1e-4 * t) * res_norm:
                p, lam = p_try, lam_try
                res, ja, jb = res_try, ja_try, jb_try
                res_norm = norm_try
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if res_norm <= TOL_KKT:
                break
            raise SolverFailureError("line search stalled", float(res_norm))
    if res_norm > TOL_KKT:
        raise SolverFailureError(
            f"no convergence in {max_iter} iterations", float(res_norm))
    sol = _finish(pair, p, "newton_kkt", iterations)
    return sol


def solve_min_scaling(pair, warm_start=None):
    """Minimal scaling of pair.A subject to pair.B, with dispatch.

    warm_start, when given, is (point, multiplier) handed to the Newton
    solver; it is ignored by the closed-form branches.
    """
    if not isinstance(pair, PrimitivePair):
        raise TypeError("solve_min_scaling expects a PrimitivePair")
    a_is_half = isinstance(pair.prim_a, Halfspace)
    if not a_is_half:
        # Inactive-constraint short circuit at A's unconstrained minimizer.
        bottom = world_body_minimizer(pair.prim_a, pair.frame_a)
        if eval_scaling(pair.prim_b, pair.frame_b, bottom, 0).value <= 1.0:
            ja = eval_scaling(pair.prim_a, pair.frame_a, bottom, 1)
            stat = float(np.max(np.abs(ja.dFdp)))
            return MinScalingSolution(alpha=float(ja.value), point=bottom,
                                      multiplier=0.0, kkt_residual=stat,
                                      solver_tag="closed_form")
    kind_a = type(pair.prim_a).__name__
    kind_b = type(pair.prim_b).__name__
    if kind_a == "Ellipsoid" and kind_b == "Ellipsoid":
        return rimon_closed_form(pair)
    if kind_a == "Ellipsoid" and kind_b == "Halfspace":
        return _halfspace_constraint_solution(pair)
    if kind_a == "Halfspace" and kind_b == "Ellipsoid":
        return _halfspace_objective_solution(pair)
    return newton_kkt(pair, init=warm_start)
