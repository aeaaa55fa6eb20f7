"""Primitive pairs for the minimal-scaling problem.

Side A is the set whose scaling function is minimized (the robot); side B
supplies the unit-sublevel constraint set. The combined parameter vector
is theta = [theta_A; theta_B]. The solvers need a positive definite
point Hessian somewhere in the pair, so at least one side must be an
ellipsoid, and in particular two polytopes or a halfspace against a
polytope are rejected.
"""

from dataclasses import dataclass

import numpy as np

from ..geometry import Ellipsoid, Halfspace, SmoothPolytope
from ..geometry.frames import Frame


def _kind_name(prim):
    if isinstance(prim, Ellipsoid):
        return "ellipsoid"
    if isinstance(prim, Halfspace):
        return "halfspace"
    if isinstance(prim, SmoothPolytope):
        return "polytope"
    raise TypeError(f"unsupported primitive {type(prim).__name__}")


@dataclass(frozen=True)
class PrimitivePair:
    """A scaled set A paired with a constraint set B, plus their frames."""

    prim_a: object
    frame_a: Frame
    prim_b: object
    frame_b: Frame

    def __post_init__(self):
        kind_a = _kind_name(self.prim_a)
        kind_b = _kind_name(self.prim_b)
        if "ellipsoid" not in (kind_a, kind_b):
            raise ValueError(
                f"pair {kind_a}-{kind_b} is unsupported: one side must be an ellipsoid")
        dims = {self.prim_a.dim, self.frame_a.dim,
                self.prim_b.dim, self.frame_b.dim}
        if len(dims) != 1:
            raise ValueError(f"mixed dimensions in pair: {sorted(dims)}")

    @property
    def dim(self):
        return self.frame_a.dim

    @property
    def kind(self):
        """Unordered pair kind, ellipsoid first."""
        other = {_kind_name(self.prim_a), _kind_name(self.prim_b)}
        other.discard("ellipsoid")
        return f"ellipsoid-{other.pop()}" if other else "ellipsoid-ellipsoid"

    @property
    def n_theta_a(self):
        return self.frame_a.n_theta

    @property
    def n_theta_b(self):
        return self.frame_b.n_theta

    @property
    def n_theta(self):
        return self.n_theta_a + self.n_theta_b

    @property
    def slice_a(self):
        return slice(0, self.n_theta_a)

    @property
    def slice_b(self):
        return slice(self.n_theta_a, self.n_theta)

    def theta(self):
        return np.concatenate([self.frame_a.flatten(), self.frame_b.flatten()])

    def with_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_theta,):
            raise ValueError(
                f"theta length {theta.shape} does not match pair ({self.n_theta},)")
        return PrimitivePair(
            self.prim_a, Frame.from_theta(theta[self.slice_a], self.dim),
            self.prim_b, Frame.from_theta(theta[self.slice_b], self.dim))
