"""Rigid-frame parameters and their flattened vector form.

A frame is an origin plus an orientation: a scalar angle in 2D or an
(x, y, z, w) quaternion in 3D. The flattened parameter vector is
[origin; angle] (length 3) or [origin; quaternion] (length 7) and is the
variable every scaling-function derivative is taken against.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import rotation as rot

UNIT_NORM_TOL = 1e-6


@dataclass(frozen=True)
class Frame:
    """Pose of a body frame in the world.

    origin: length-2 or length-3 position (meters).
    orientation: angle in radians (2D) or quaternion (x, y, z, w) (3D).
    """

    origin: np.ndarray
    orientation: object = 0.0

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float)
        object.__setattr__(self, "origin", origin)
        if origin.shape not in ((2,), (3,)):
            raise ValueError(f"origin must have length 2 or 3, got {origin.shape}")
        if origin.shape == (3,):
            quat = np.asarray(self.orientation, dtype=float)
            if quat.shape != (4,):
                raise ValueError("3D frames need an (x, y, z, w) quaternion")
            object.__setattr__(self, "orientation", quat)
        else:
            object.__setattr__(self, "orientation", float(self.orientation))

    @property
    def dim(self):
        return self.origin.shape[0]

    @property
    def n_orient(self):
        return 1 if self.dim == 2 else 4

    @property
    def n_theta(self):
        return self.dim + self.n_orient

    @classmethod
    def identity(cls, dim):
        if dim == 2:
            return cls(np.zeros(2), 0.0)
        return cls(np.zeros(3), rot.IDENTITY_QUAT.copy())

    @classmethod
    def from_theta(cls, theta, dim):
        theta = np.asarray(theta, dtype=float)
        if dim == 2:
            if theta.shape != (3,):
                raise ValueError("2D flattened frame vector has length 3")
            return cls(theta[:2], float(theta[2]))
        if theta.shape != (7,):
            raise ValueError("3D flattened frame vector has length 7")
        return cls(theta[:3], theta[3:])

    def rotation(self):
        cached = self.__dict__.get("_rot")
        if cached is None:
            cached = (rot.rotation_2d(self.orientation) if self.dim == 2
                      else rot.rotation_3d(self.orientation))
            object.__setattr__(self, "_rot", cached)
        return cached

    def rotation_grads(self):
        """Stack of dR/d(orientation_k), shape (n_orient, dim, dim)."""
        cached = self.__dict__.get("_rot_grads")
        if cached is None:
            cached = (rot.rotation_2d_grad(self.orientation) if self.dim == 2
                      else rot.rotation_3d_grad(self.orientation))
            object.__setattr__(self, "_rot_grads", cached)
        return cached

    def rotation_hessians(self):
        """Stack of d2R/d(orientation_k)d(orientation_l)."""
        if self.dim == 3:
            return rot.ROTATION_3D_HESS
        cached = self.__dict__.get("_rot_hess")
        if cached is None:
            cached = rot.rotation_2d_hess(self.orientation)
            object.__setattr__(self, "_rot_hess", cached)
        return cached

    def flatten(self):
        if self.dim == 2:
            return np.concatenate([self.origin, [self.orientation]])
        return np.concatenate([self.origin, self.orientation])

    def to_dict(self):
        if self.dim == 2:
            return {"origin": self.origin.tolist(), "angle": self.orientation}
        return {"origin": self.origin.tolist(), "quaternion": self.orientation.tolist()}

    @classmethod
    def from_dict(cls, data):
        origin = np.asarray(data["origin"], dtype=float)
        if "quaternion" in data:
            return cls(origin, np.asarray(data["quaternion"], dtype=float))
        return cls(origin, float(data.get("angle", 0.0)))


def flatten_theta(frame):
    """Flattened parameter vector [origin; orientation]."""
    return frame.flatten()


def theta_rates(frame, linear_velocity, angular_velocity):
    """Time derivative of the flattened parameter vector.

    2D: angular_velocity is a scalar angle rate. 3D: angular_velocity is the
    world-frame angular velocity (length 3) and the quaternion rate is
    0.5 * Q(quat) @ omega. A quaternion off the unit sphere by more than
    UNIT_NORM_TOL gets a warning diagnostic; the computation proceeds in the
    ambient parameter space either way.
    """
    v = np.asarray(linear_velocity, dtype=float)
    if v.shape != (frame.dim,):
        raise ValueError("linear velocity length must match frame dimension")
    if frame.dim == 2:
        return np.concatenate([v, [float(angular_velocity)]])
    omega = np.asarray(angular_velocity, dtype=float)
    if omega.shape != (3,):
        raise ValueError("3D angular velocity must have length 3")
    quat = frame.orientation
    norm = np.linalg.norm(quat)
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        warnings.warn(
            f"quaternion norm {norm:.9f} deviates from 1 beyond {UNIT_NORM_TOL}; "
            "rates computed in the ambient parameter space",
            RuntimeWarning,
            stacklevel=2,
        )
    quat_dot = 0.5 * rot.kinematic_matrix(quat) @ omega
    return np.concatenate([v, quat_dot])
