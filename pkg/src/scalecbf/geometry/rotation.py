"""Rotation parameterizations and their parameter derivatives.

2D frames carry a single angle. 3D frames carry a quaternion stored in
(x, y, z, w) component order, Hamilton convention, with the rotation built
from the exact quadratic form

    R(xi) = (w^2 - v.v) I + 2 v v^T + 2 w [v]x,    v = (x, y, z).

R is a proper rotation exactly when ||xi|| = 1; off the unit sphere it is
still a smooth quadratic map of the ambient 4-vector, which is what every
derivative here is taken with respect to (no unit-sphere projection).
Consequences used downstream: quaternion second derivatives of R are
constant and third derivatives vanish; in 2D, R'' = -R.
"""

import numpy as np


def rotation_2d(angle):
    c = np.cos(angle)
    s = np.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotation_2d_grad(angle):
    """Stack of dR/d(angle), shape (1, 2, 2)."""
    c = np.cos(angle)
    s = np.sin(angle)
    return np.array([[[-s, -c], [c, -s]]])


def rotation_2d_hess(angle):
    """Stack of d2R/d(angle)2, shape (1, 1, 2, 2). Equals -R."""
    return -rotation_2d(angle)[None, None]


def skew(v):
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def rotation_3d(quat):
    """Quadratic-form rotation matrix from an (x, y, z, w) quaternion."""
    x, y, z, w = quat
    v = np.array([x, y, z])
    return (w * w - v @ v) * np.eye(3) + 2.0 * np.outer(v, v) + 2.0 * w * skew(v)


def rotation_3d_grad(quat):
    """Stack of dR/d(xi_k) for k in (x, y, z, w), shape (4, 3, 3).

    Linear in the quaternion since R is quadratic.
    """
    x, y, z, w = quat
    v = np.array([x, y, z])
    eye = np.eye(3)
    out = np.empty((4, 3, 3))
    for k in range(3):
        ek = np.zeros(3)
        ek[k] = 1.0
        out[k] = (-2.0 * v[k] * eye
                  + 2.0 * (np.outer(ek, v) + np.outer(v, ek))
                  + 2.0 * w * skew(ek))
    out[3] = 2.0 * w * eye + 2.0 * skew(v)
    return out


def _build_quat_hess():
    # rotation_3d_grad is linear with zero constant term, so evaluating it on
    # basis quaternions reads off the constant second-derivative tensor.
    out = np.empty((4, 4, 3, 3))
    for l in range(4):
        basis = np.zeros(4)
        basis[l] = 1.0
        out[:, l] = rotation_3d_grad(basis)
    return out


#: Constant d2R/d(xi_k)d(xi_l), shape (4, 4, 3, 3).
ROTATION_3D_HESS = _build_quat_hess()
ROTATION_3D_HESS.setflags(write=False)

#: Identity quaternion in (x, y, z, w) order.
IDENTITY_QUAT = np.array([0.0, 0.0, 0.0, 1.0])
IDENTITY_QUAT.setflags(write=False)


def quat_multiply(q1, q2):
    """Hamilton product, both factors and the result in (x, y, z, w) order."""
    x1, y1, z1, w1 = q1
    x2, y2, z2, w2 = q2
    return np.array([
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
    ])


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return np.concatenate([np.sin(half) * axis, [np.cos(half)]])


def kinematic_matrix(quat):
    """Matrix Q mapping world angular velocity to quaternion rates.

    quat_dot = 0.5 * Q(quat) @ omega, with quat stored (x, y, z, w) and
    omega expressed in the world frame.
    """
    x, y, z, w = quat
    return np.array([
        [w, z, -y],
        [-z, w, x],
        [y, -x, w],
        [-x, -y, -z],
    ])
