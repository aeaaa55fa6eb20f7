"""World-frame evaluation of scaling functions with derivative jets.

A primitive's body function G is composed with the rigid placement
s = R(q)^T (p - o), giving the world-frame value F(p, theta) = G(s) with
theta = [o; q] the flattened frame vector. This module assembles the
derivatives of F with respect to the world point p and theta up to third
order from the body jet (G1, G2, G3) and the rotation derivatives.

Orientation derivatives are ambient: the quaternion is treated as a free
4-vector, with no projection onto the unit sphere. Since s depends on o
only through p - o, every derivative in an origin component equals the
matching p derivative times (-1) per origin index, which is how the theta
blocks are assembled below.
"""

from dataclasses import dataclass

import numpy as np

from .primitives import Ellipsoid

TOL_GRAD = 1e-12


@dataclass(frozen=True)
class ScalingJet:
    """Value and requested derivatives of F(p, theta) at one configuration.

    Block shapes (n_p = point dimension, n_t = len(theta)):
      dFdp (n_p,), dFdtheta (n_t,), d2Fdp2 (n_p, n_p),
      d2Fdthetadp (n_t, n_p), d2Fdtheta2 (n_t, n_t),
      d3Fdp3 (n_p, n_p, n_p), d3Fdp2dtheta (n_p, n_p, n_t),
      d3Fdpdtheta2 (n_p, n_t, n_t).
    Blocks above the requested order are None.
    """

    order: int
    value: float
    dFdp: np.ndarray = None
    dFdtheta: np.ndarray = None
    d2Fdp2: np.ndarray = None
    d2Fdthetadp: np.ndarray = None
    d2Fdtheta2: np.ndarray = None
    d3Fdp3: np.ndarray = None
    d3Fdp2dtheta: np.ndarray = None
    d3Fdpdtheta2: np.ndarray = None


def eval_scaling(prim, frame, p, order=0):
    """Evaluate a primitive's scaling function at a world point.

    Returns a ScalingJet holding F and every derivative block up to the
    requested order (0 to 3) with respect to p and the flattened frame
    vector. Third-order blocks cover only the combinations with at least
    one p index; the pure theta third derivative is never needed and is
    not produced.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be 0..3, got {order!r}")
    p = np.asarray(p, dtype=float)
    dim = frame.dim
    if p.shape != (dim,):
        raise ValueError(f"point shape {p.shape} does not match frame dimension {dim}")
    if prim.dim != dim:
        raise ValueError(f"primitive dimension {prim.dim} does not match frame {dim}")
    if dim == 2:
        return _jet_planar(prim, frame, p, order)
    return _jet_general(prim, frame, p, order)


# Shared read-only zero block for bodies with constant Hessians; consumers
# may identity-test against a matching block to skip null contractions.
_ZERO3 = np.zeros((2, 2, 2))
_ZERO3.flags.writeable = False


def _ellipsoid_scalars(prim):
    cached = prim.__dict__.get("_flat")
    if cached is not None:
        return cached
    flat = (float(prim.shape[0, 0]), float(prim.shape[0, 1]),
            float(prim.shape[1, 1]), float(prim.center[0]),
            float(prim.center[1]))
    object.__setattr__(prim, "_flat", flat)
    return flat


def _jet_planar(prim, frame, p, order):
    """Single-angle 2D assembly; same blocks as the general path with the
    one-generator contractions unrolled to scalar arithmetic."""
    origin = frame.origin
    d0 = float(p[0]) - float(origin[0])
    d1 = float(p[1]) - float(origin[1])
    rmat = frame.rotation()
    co = float(rmat[0, 0])
    sn = float(rmat[1, 0])
    s0 = co * d0 + sn * d1
    s1 = -sn * d0 + co * d1

    if isinstance(prim, Ellipsoid):
        m00, m01, m11, c0, c1 = _ellipsoid_scalars(prim)
        w0 = s0 - c0
        w1 = s1 - c1
        value = m00 * w0 * w0 + 2.0 * m01 * w0 * w1 + m11 * w1 * w1
        if order == 0:
            return ScalingJet(order=0, value=value)
        a0 = 2.0 * (m00 * w0 + m01 * w1)
        a1 = 2.0 * (m01 * w0 + m11 * w1)
        h00, h01, h11 = 2.0 * m00, 2.0 * m01, 2.0 * m11
        g3 = None
    else:
        value, g1, g2, g3 = prim.body_jet(np.array([s0, s1]), order)
        value = float(value)
        if order == 0:
            return ScalingJet(order=0, value=value)
        a0 = float(g1[0])
        a1 = float(g1[1])
        if order > 1:
            h00 = float(g2[0, 0])
            h01 = float(g2[0, 1])
            h11 = float(g2[1, 1])

    # dR/dangle pairs with the lever arm as rk0^T d = (s1, -s0).
    fp0 = co * a0 - sn * a1
    fp1 = sn * a0 + co * a1
    f_q = s1 * a0 - s0 * a1
    f_p = np.array([fp0, fp1])
    dfdtheta = np.array([-fp0, -fp1, f_q])
    if order == 1:
        return ScalingJet(order=1, value=value, dFdp=f_p, dFdtheta=dfdtheta)

    # g2 R^T, then everything else by rows.
    m00 = h00 * co - h01 * sn
    m01 = h00 * sn + h01 * co
    m10 = h01 * co - h11 * sn
    m11 = h01 * sn + h11 * co
    p00 = co * m00 - sn * m10
    p01 = co * m01 - sn * m11
    p11 = sn * m01 + co * m11
    q0 = -sn * a0 - co * a1 + s1 * m00 - s0 * m10
    q1 = co * a0 - sn * a1 + s1 * m01 - s0 * m11
    # second angle derivative of R is -R, so the pure-angle block folds
    # the body gradient back in with a sign.
    f_qq = -(s0 * a0 + s1 * a1) \
        + h00 * s1 * s1 - 2.0 * h01 * s1 * s0 + h11 * s0 * s0
    f_pp = np.array([[p00, p01], [p01, p11]])
    d2dthetadp = np.array([[-p00, -p01], [-p01, -p11], [q0, q1]])
    d2dtheta2 = np.array([[p00, p01, -q0],
                          [p01, p11, -q1],
                          [-q0, -q1, f_qq]])
    if order == 2:
        return ScalingJet(order=2, value=value, dFdp=f_p, dFdtheta=dfdtheta,
                          d2Fdp2=f_pp, d2Fdthetadp=d2dthetadp,
                          d2Fdtheta2=d2dtheta2)

    hh00 = -sn * m00 - co * m10
    hh01 = -sn * m01 - co * m11
    hh10 = co * m00 - sn * m10
    hh11 = co * m01 - sn * m11
    e00 = hh00 + hh00
    e01 = hh01 + hh10
    e11 = hh11 + hh11
    gu0 = h00 * s1 - h01 * s0
    gu1 = h01 * s1 - h11 * s0
    gs0 = h00 * s0 + h01 * s1
    gs1 = h01 * s0 + h11 * s1
    v0 = -fp0 + 2.0 * (-sn * gu0 - co * gu1) - (co * gs0 - sn * gs1)
    v1 = -fp1 + 2.0 * (co * gu0 - sn * gu1) - (sn * gs0 + co * gs1)
    if g3 is None:
        f_ppp = _ZERO3
    else:
        f_ppp = np.einsum("ia,jb,mc,abc->ijm", rmat, rmat, rmat, g3)
        uv = np.array([s1, -s0])
        g3u = g3 @ uv
        corr = rmat @ g3u @ rmat.T
        e00 += corr[0, 0]
        e01 += 0.5 * (corr[0, 1] + corr[1, 0])
        e11 += corr[1, 1]
        vcorr = rmat @ (g3u @ uv)
        v0 += vcorr[0]
        v1 += vcorr[1]
    d3dp2dtheta = np.empty((2, 2, 3))
    d3dp2dtheta[:, :, :2] = -f_ppp
    d3dp2dtheta[0, 0, 2] = e00
    d3dp2dtheta[0, 1, 2] = e01
    d3dp2dtheta[1, 0, 2] = e01
    d3dp2dtheta[1, 1, 2] = e11
    d3dpdtheta2 = np.empty((2, 3, 3))
    d3dpdtheta2[:, :2, :2] = f_ppp
    d3dpdtheta2[0, :2, 2] = (-e00, -e01)
    d3dpdtheta2[1, :2, 2] = (-e01, -e11)
    d3dpdtheta2[0, 2, :2] = (-e00, -e01)
    d3dpdtheta2[1, 2, :2] = (-e01, -e11)
    d3dpdtheta2[0, 2, 2] = v0
    d3dpdtheta2[1, 2, 2] = v1
    return ScalingJet(order=3, value=value, dFdp=f_p, dFdtheta=dfdtheta,
                      d2Fdp2=f_pp, d2Fdthetadp=d2dthetadp,
                      d2Fdtheta2=d2dtheta2, d3Fdp3=f_ppp,
                      d3Fdp2dtheta=d3dp2dtheta, d3Fdpdtheta2=d3dpdtheta2)


def _jet_general(prim, frame, p, order):
    dim = frame.dim
    d = p - frame.origin
    rmat = frame.rotation()
    s = rmat.T @ d
    value, g1, g2, g3 = prim.body_jet(s, order)
    if order == 0:
        return ScalingJet(order=0, value=value)

    rk = frame.rotation_grads()
    u = np.einsum("kji,j->ki", rk, d)
    f_p = rmat @ g1
    f_q = u @ g1
    dfdtheta = np.concatenate([-f_p, f_q])
    if order == 1:
        return ScalingJet(order=1, value=value, dFdp=f_p, dFdtheta=dfdtheta)

    rkl = frame.rotation_hessians()
    u2 = np.einsum("klji,j->kli", rkl, d)
    f_pp = rmat @ g2 @ rmat.T
    f_qp = np.einsum("kia,a->ki", rk, g1) + u @ g2 @ rmat.T
    f_qq = np.einsum("kla,a->kl", u2, g1) + u @ g2 @ u.T
    d2dthetadp = np.concatenate([-f_pp, f_qp], axis=0)
    n_q = u.shape[0]
    n_t = dim + n_q
    d2dtheta2 = np.empty((n_t, n_t))
    d2dtheta2[:dim, :dim] = f_pp
    d2dtheta2[:dim, dim:] = -f_qp.T
    d2dtheta2[dim:, :dim] = -f_qp
    d2dtheta2[dim:, dim:] = f_qq
    if order == 2:
        return ScalingJet(order=2, value=value, dFdp=f_p, dFdtheta=dfdtheta,
                          d2Fdp2=f_pp, d2Fdthetadp=d2dthetadp,
                          d2Fdtheta2=d2dtheta2)

    # Third order. G3 is None for shapes whose body Hessian is constant,
    # which zeroes the body-cubic contractions but not the rotation terms.
    f_ppq = (np.einsum("kia,ab,jb->ijk", rk, g2, rmat)
             + np.einsum("ia,ab,kjb->ijk", rmat, g2, rk))
    f_pqq = (np.einsum("klia,a->ikl", rkl, g1)
             + np.einsum("kia,ab,lb->ikl", rk, g2, u)
             + np.einsum("lia,ab,kb->ikl", rk, g2, u)
             + np.einsum("ia,ab,klb->ikl", rmat, g2, u2))
    if g3 is None:
        f_ppp = np.zeros((dim, dim, dim))
    else:
        f_ppp = np.einsum("ia,jb,mc,abc->ijm", rmat, rmat, rmat, g3)
        f_ppq = f_ppq + np.einsum("ia,jb,abc,kc->ijk", rmat, rmat, g3, u)
        f_pqq = f_pqq + np.einsum("ia,abc,kb,lc->ikl", rmat, g3, u, u)
    d3dp2dtheta = np.concatenate([-f_ppp, f_ppq], axis=2)
    d3dpdtheta2 = np.empty((dim, n_t, n_t))
    d3dpdtheta2[:, :dim, :dim] = f_ppp
    d3dpdtheta2[:, :dim, dim:] = -f_ppq
    d3dpdtheta2[:, dim:, :dim] = -f_ppq.transpose(0, 2, 1)
    d3dpdtheta2[:, dim:, dim:] = f_pqq
    return ScalingJet(order=3, value=value, dFdp=f_p, dFdtheta=dfdtheta,
                      d2Fdp2=f_pp, d2Fdthetadp=d2dthetadp,
                      d2Fdtheta2=d2dtheta2, d3Fdp3=f_ppp,
                      d3Fdp2dtheta=d3dp2dtheta, d3Fdpdtheta2=d3dpdtheta2)


def gradient_nonzero_outside(prim, frame, p, tol_grad=TOL_GRAD):
    """True when the point gradient has norm above tol_grad.

    Meant to be called where the scaling value exceeds 1; solvers assert
    it before dividing by gradient norms.
    """
    jet = eval_scaling(prim, frame, p, order=1)
    return bool(np.linalg.norm(jet.dFdp) > tol_grad)
