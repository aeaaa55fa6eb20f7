"""Derivatives of the minimal scaling with respect to both frames.

With the constraint active, the optimum (p*, lambda*) solves the square
KKT system, so the implicit function theorem gives their parameter
Jacobians from one linear solve against the bordered matrix

    N = [[F_A,pp + lambda* F_B,pp, F_B,p], [F_B,p^T, 0]].

The gradient of alpha* follows by the chain rule through p*. For the
Hessian the same system is differentiated once more: total derivatives
of N and of the right-hand side along theta_j (third-order jets contract
with dp*/dtheta_j) yield d2p*/dtheta_j dtheta in one batched solve, and
the Hessian is assembled from the stacked pieces and symmetrized after
asserting the asymmetry stays at roundoff level.

The optional cols argument restricts the Hessian to a principal block of
theta indices (the robot's slice during simulation, where the obstacle
frame is static); the restriction is exact, not an approximation.
"""

from dataclasses import dataclass

import numpy as np

from ..geometry import eval_scaling

ASYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class AlphaSensitivity:
    """Minimal-scaling solution with its first and second theta derivatives."""

    solution: object
    grad: np.ndarray
    hess: np.ndarray = None


def _check_solution(sol):
    if sol.alpha <= 1.0:
        raise ValueError(
            f"sensitivity needs separated sets, got alpha* = {sol.alpha:.6f} <= 1")
    if sol.multiplier <= 0.0:
        raise ValueError("sensitivity needs an active constraint (multiplier > 0)")
    if sol.kkt_residual > 1e-8:
        raise ValueError(
            f"KKT residual {sol.kkt_residual:.3e} too large to differentiate")


def _pad_rows(block, sl, n_theta):
    out = np.zeros((n_theta,) + block.shape[1:])
    out[sl] = block
    return out


def _kkt_pieces(pair, sol, order):
    """Jets of both sides at the optimum plus the bordered KKT matrix."""
    ja = eval_scaling(pair.prim_a, pair.frame_a, sol.point, order)
    jb = eval_scaling(pair.prim_b, pair.frame_b, sol.point, order)
    dim = pair.dim
    lam = sol.multiplier
    bordered = np.zeros((dim + 1, dim + 1))
    bordered[:dim, :dim] = ja.d2Fdp2 + lam * jb.d2Fdp2
    bordered[:dim, dim] = jb.dFdp
    bordered[dim, :dim] = jb.dFdp
    return ja, jb, bordered


def _first_order(pair, sol, ja, jb, bordered):
    """Solve for (dp*/dtheta, dlambda*/dtheta) and the alpha gradient.

    Also returns the explicit bordered inverse so follow-up solves against
    the same matrix are plain matmuls; the system is (dim + 1) square and
    nondegenerate wherever _check_solution admits a solution.
    """
    dim = pair.dim
    n_t = pair.n_theta
    n_a = pair.n_theta_a
    lam = sol.multiplier
    rhs = np.zeros((dim + 1, n_t))
    rhs[:dim, :n_a] = -ja.d2Fdthetadp.T
    rhs[:dim, n_a:] = (-lam) * jb.d2Fdthetadp.T
    rhs[dim, n_a:] = -jb.dFdtheta
    binv = np.linalg.inv(bordered)
    sens = binv @ rhs
    jac = sens[:dim]
    dlam = sens[dim]
    grad = jac.T @ ja.dFdp
    grad[:n_a] += ja.dFdtheta
    return jac, dlam, grad, binv


def alpha_gradient(pair, sol):
    """Gradient of alpha* in theta = [theta_A; theta_B]."""
    _check_solution(sol)
    ja, jb, bordered = _kkt_pieces(pair, sol, 2)
    _, _, grad, _ = _first_order(pair, sol, ja, jb, bordered)
    return grad


def alpha_hessian(pair, sol, cols=None):
    """Hessian of alpha* in theta, optionally restricted to cols x cols.

    cols is a sequence of theta indices; the returned matrix has shape
    (len(cols), len(cols)) in that index order. Defaults to the full
    theta block.
    """
    return alpha_sensitivity(pair, sol, order=2, cols=cols).hess


def alpha_directional(pair, sol, direction):
    """Gradient of alpha* plus its second derivative along one direction.

    Returns (grad, quad) with quad = direction' H direction for the full
    theta Hessian H, assembled from a single bordered solve instead of
    one per theta column. Exact (not an approximation); the closed-loop
    barrier rows only ever consume this quadratic form. Only the block of
    H over the contiguous span of nonzero direction entries is formed.
    """
    _check_solution(sol)
    v = np.asarray(direction, dtype=float).ravel()
    n_t = pair.n_theta
    if v.shape != (n_t,):
        raise ValueError(f"direction must have length {n_t}")
    ja, jb, bordered = _kkt_pieces(pair, sol, 3)
    jac, dlam, grad, binv = _first_order(pair, sol, ja, jb, bordered)

    vl = v.tolist()
    lo = 0
    while lo < n_t and vl[lo] == 0.0:
        lo += 1
    if lo == n_t:
        return grad, 0.0
    hi = n_t
    while vl[hi - 1] == 0.0:
        hi -= 1

    dim = pair.dim
    lam = sol.multiplier
    n_a = pair.n_theta_a
    # The span [lo, hi) covers every nonzero entry; columns outside it are
    # annihilated by the final contraction, so only this block is built.
    # Zeros inside the span are carried along, which stays exact.
    has_a = lo < n_a
    has_b = hi > n_a
    a_hi = n_a if hi > n_a else hi
    ka = a_hi - lo if has_a else 0
    b_lo = lo - n_a if lo > n_a else 0
    b_hi = hi - n_a
    k = hi - lo
    v_s = v[lo:hi]
    v_a = v[:n_a]
    v_b = v[n_a:]

    jac_s = jac[:, lo:hi]
    jac_v = jac_s @ v_s
    dlam_v = float(dlam[lo:hi] @ v_s)

    t3a = ja.d3Fdp3
    t3b = jb.d3Fdp3
    if t3a is t3b:
        # Shared all-zeros block from constant-Hessian bodies.
        dmat = dlam_v * jb.d2Fdp2
    else:
        dmat = (t3a + lam * t3b) @ jac_v + dlam_v * jb.d2Fdp2
    dvec = jb.d2Fdp2 @ jac_v
    base_v = float(jac_v @ (ja.d2Fdp2 @ jac_v))
    # rhs holds the positive total derivative pieces, negated in place at
    # the end; columns are the support block only.
    rhs = np.empty((dim + 1, k))
    if has_a:
        blk = ja.d3Fdp2dtheta.transpose(0, 2, 1) @ jac_v
        blk += ja.d3Fdpdtheta2 @ v_a
        rhs[:dim, :ka] = blk[:, lo:a_hi]
        dmat += ja.d3Fdp2dtheta @ v_a
        hatp_v = ja.d2Fdthetadp.T @ v_a
        base_v += float(v_a @ (ja.d2Fdtheta2 @ v_a)) \
            + 2.0 * float(hatp_v @ jac_v)
    if has_b:
        hbtp_t = jb.d2Fdthetadp.T
        blk = jb.d3Fdp2dtheta.transpose(0, 2, 1) @ jac_v
        blk += jb.d3Fdpdtheta2 @ v_b
        blk *= lam
        blk += dlam_v * hbtp_t
        rhs[:dim, ka:] = blk[:, b_lo:b_hi]
        dmat += lam * (jb.d3Fdp2dtheta @ v_b)
        hbtp_v = hbtp_t @ v_b
        dvec += hbtp_v
        bot = jac_s.T @ hbtp_v
        bot[ka:] += (jb.d2Fdtheta2 @ v_b)[b_lo:b_hi]
        bot += dvec @ jac_s
        rhs[dim] = bot
    else:
        rhs[dim] = dvec @ jac_s
    rhs[:dim] += dmat @ jac_s + np.outer(dvec, dlam[lo:hi])
    np.negative(rhs, out=rhs)
    second = binv @ rhs

    quad = base_v + float(ja.dFdp @ (second[:dim] @ v_s))
    return grad, quad


def alpha_sensitivity(pair, sol, order=1, cols=None):
    """Bundle the solution with its gradient and optional Hessian."""
    _check_solution(sol)
    if order not in (1, 2):
        raise ValueError("sensitivity order must be 1 or 2")
    ja, jb, bordered = _kkt_pieces(pair, sol, 2 if order == 1 else 3)
    jac, dlam, grad, binv = _first_order(pair, sol, ja, jb, bordered)
    if order == 1:
        return AlphaSensitivity(solution=sol, grad=grad)
    ha_tp = _pad_rows(ja.d2Fdthetadp, pair.slice_a, pair.n_theta)
    hb_tp = _pad_rows(jb.d2Fdthetadp, pair.slice_b, pair.n_theta)

    dim = pair.dim
    n_t = pair.n_theta
    lam = sol.multiplier
    sel = np.arange(n_t) if cols is None else np.asarray(cols, dtype=int)
    n_s = sel.shape[0]

    ha_tt = np.zeros((n_t, n_t))
    ha_tt[pair.slice_a, pair.slice_a] = ja.d2Fdtheta2
    hb_tt = np.zeros((n_t, n_t))
    hb_tt[pair.slice_b, pair.slice_b] = jb.d2Fdtheta2

    def pad_p2t(block, sl):
        out = np.zeros((dim, dim, n_t))
        out[:, :, sl] = block
        return out

    def pad_pt2(block, sl):
        out = np.zeros((dim, n_t, n_t))
        out[:, sl, sl] = block
        return out

    t_p3 = ja.d3Fdp3 + lam * jb.d3Fdp3
    t_p2t = pad_p2t(ja.d3Fdp2dtheta, pair.slice_a) \
        + lam * pad_p2t(jb.d3Fdp2dtheta, pair.slice_b)
    t_pt2 = pad_pt2(ja.d3Fdpdtheta2, pair.slice_a) \
        + lam * pad_pt2(jb.d3Fdpdtheta2, pair.slice_b)

    jac_s = jac[:, sel]
    dlam_s = dlam[sel]
    # Total derivative of the bordered matrix along each selected theta_j.
    dmat = (np.moveaxis(t_p3 @ jac_s, 2, 0)
            + t_p2t[:, :, sel].transpose(2, 0, 1)
            + dlam_s[:, None, None] * jb.d2Fdp2[None])
    dvec = (jb.d2Fdp2 @ jac_s).T + hb_tp[sel]
    # Total derivative of the first-order right-hand side.
    dtop = -(np.tensordot(t_p2t, jac_s, axes=(1, 0)).transpose(2, 0, 1)
             + t_pt2[:, :, sel].transpose(2, 0, 1)
             + dlam_s[:, None, None] * hb_tp.T[None])
    dbot = -((hb_tp @ jac).T[sel] + hb_tt[sel])

    rhs = np.zeros((n_s, dim + 1, n_t))
    rhs[:, :dim, :] = dtop - (dmat @ jac + dvec[:, :, None] * dlam[None, None, :])
    rhs[:, dim, :] = dbot - dvec @ jac
    second = binv @ rhs

    base = (ha_tt + jac.T @ ja.d2Fdp2 @ jac
            + ha_tp @ jac + (ha_tp @ jac).T)
    hess = base[np.ix_(sel, sel)] \
        + np.tensordot(second[:, :dim, :], ja.dFdp, axes=(1, 0))[:, sel]
    scale = max(1.0, float(np.max(np.abs(hess))))
    asym = float(np.max(np.abs(hess - hess.T))) / scale
    if asym > ASYMMETRY_TOL:
        raise FloatingPointError(
            f"alpha Hessian asymmetry {asym:.3e} exceeds {ASYMMETRY_TOL}")
    hess = 0.5 * (hess + hess.T)
    return AlphaSensitivity(solution=sol, grad=grad, hess=hess)
