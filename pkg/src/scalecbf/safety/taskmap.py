"""Task maps from plant state to frame parameters.

A task map exposes theta(x) together with the structure needed for its
first two time derivatives along the dynamics: theta_dot = J(x) v and
theta_ddot = b(x) + A(x) u. Everything downstream (row assembly) only
touches this interface.
"""

import numpy as np

# Constant structure for the planar point map, shared and read only.
_PLANAR_PAD = np.zeros((3, 2))
_PLANAR_PAD[:2, :2] = np.eye(2)
_PLANAR_PAD.flags.writeable = False
_PLANAR_DRIFT = np.zeros(3)
_PLANAR_DRIFT.flags.writeable = False


class PlanarPointMap:
    """Planar double integrator, x = [q, v], u = acceleration.

    theta is the robot frame vector [o_x, o_y, beta] with the heading
    frozen at zero; disks and fixed-orientation bodies carry no heading
    dynamics. J and A are the identity padded with a zero heading row.
    rate_map, input_map, and drift return shared read-only arrays.
    """

    n_cfg = 2
    n_u = 2
    n_theta = 3

    def position(self, x):
        return np.asarray(x, dtype=float)[:2]

    def velocity(self, x):
        return np.asarray(x, dtype=float)[2:4]

    def theta(self, x):
        q = self.position(x)
        return np.array([q[0], q[1], 0.0])

    def rate_map(self, x):
        return _PLANAR_PAD

    def drift(self, x):
        return _PLANAR_DRIFT

    def input_map(self, x):
        return _PLANAR_PAD

    def theta_dot(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([x[2], x[3], 0.0])
