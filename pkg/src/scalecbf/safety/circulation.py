"""Circulation constraint: tangential push near the safe-set boundary.

The row direction c = Phi a is orthogonal to the barrier row direction
by skew symmetry, so the constraint never fights the barrier; its
right-hand side d(phi, distance-to-rest-set) only demands motion when
the state is slow and close to the boundary.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rows import ConstraintRow

_SKEW_TOL = 1e-12

_SKEW_CACHE = {}


def skew_matrix(n):
    """Default circulation matrix for an n-dimensional input.

    Even n: block-diagonal 90-degree rotations. Odd n: first component
    zeroed, the remaining pairs rotated (the permutation pattern
    c = [0, -a_3, a_2, -a_5, a_4, ...] in 1-based indexing).
    """
    if n < 2:
        raise ValueError("circulation needs at least two input dimensions")
    mat = np.zeros((n, n))
    if n % 2 == 0:
        for k in range(0, n, 2):
            mat[k, k + 1] = 1.0
            mat[k + 1, k] = -1.0
    else:
        for k in range(1, n, 2):
            mat[k, k + 1] = -1.0
            mat[k + 1, k] = 1.0
    return mat


def _default_skew(n):
    cached = _SKEW_CACHE.get(n)
    if cached is None:
        cached = skew_matrix(n)
        cached.flags.writeable = False
        _SKEW_CACHE[n] = cached
    return cached


def equilibrium_projector(lower, upper):
    """Projector onto the rest set: configuration box, zero velocity."""
    return BoxProjector(np.asarray(lower, dtype=float),
                        np.asarray(upper, dtype=float))


@dataclass(frozen=True)
class BoxProjector:
    """Rest set {(q, 0) : lower <= q <= upper} for double integrators."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if self.lower.shape != self.upper.shape:
            raise ValueError("box bound shapes differ")
        if self.lower.size == 0 or np.any(self.lower > self.upper):
            raise ValueError("empty box")

    @property
    def dim(self):
        return self.lower.size

    def project(self, x):
        x = np.asarray(x, dtype=float)
        q = np.clip(x[:self.dim], self.lower, self.upper)
        return np.concatenate([q, np.zeros(x.size - self.dim)])

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        q = x[:self.dim]
        dq = np.clip(q, self.lower, self.upper)
        dq -= q
        tail = x[self.dim:]
        return math.sqrt(float(dq @ dq) + float(tail @ tail))

    def zeta(self, x):
        """Rest input; identically zero under acceleration control."""
        return np.zeros(self.dim)


@dataclass(frozen=True)
class CirculationSpec:
    """d-function family, parameters, rest-set projector, skew matrix."""

    style: str
    params: tuple
    projector: BoxProjector
    matrix: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "params",
                           tuple(float(p) for p in self.params))
        if self.style == "linear":
            if len(self.params) != 2:
                raise ValueError("linear d-function takes (d1, d2)")
        elif self.style == "exponential":
            if len(self.params) != 5:
                raise ValueError("exponential d-function takes (d1..d5)")
        else:
            raise ValueError(f"unknown d-function style {self.style!r}")
        if self.matrix is not None:
            mat = np.asarray(self.matrix, dtype=float)
            if np.abs(mat + mat.T).max() > _SKEW_TOL:
                raise ValueError("circulation matrix must be skew")
            object.__setattr__(self, "matrix", mat)
        if not self.d_value(0.0, 0.0) > 0.0:
            raise ValueError("d(0, 0) must be positive")

    def d_value(self, h, dist):
        if self.style == "linear":
            d1, d2 = self.params
            return 1.0 - d1 * h - d2 * dist
        d1, d2, d3, d4, d5 = self.params
        return (d1 * (1.0 - np.exp(d2 * (h - d3)))
                + d4 * (np.exp(-((dist / d5) ** 2)) - 1.0))


def circulation_row(spec, a, phi, x):
    """Row c'u >= d(phi, dist) + c'zeta for the current state."""
    a = np.asarray(a, dtype=float)
    mat = spec.matrix
    if mat is None:
        mat = _default_skew(a.size)
    elif mat.shape != (a.size, a.size):
        raise ValueError("circulation matrix size mismatch")
    c = mat @ a
    dist = spec.projector.distance(x)
    rest_input = spec.projector.zeta(x)
    b = spec.d_value(phi, dist) + float(c @ rest_input)
    return ConstraintRow(c, b, "circulation")
