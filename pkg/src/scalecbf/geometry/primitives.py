"""Body-frame convex shapes represented as scaling functions.

Each primitive defines a smooth convex function F of a body-frame point s
whose unit sublevel set {F <= 1} is the shape. Magnifying the shape about
its own frame corresponds to raising the level value, which is what makes
the minimal level over another set a collision metric.

Supported shapes:
  Halfspace       F = a.s + b                       (region a.s + b <= 1)
  SmoothPolytope  F = ln(mean_i exp(k m_i))/k + 1,  m_i = a_i.s + b_i
  Ellipsoid       F = (s - center)' shape (s - center)

The polytope form keeps the 1/N mean inside the logarithm, so F = 0 at a
point where every row margin equals -1 (e.g. the center of the unit
square), and its unit sublevel set is a padded superset of the exact
polytope {m_i <= 0 for all i}. Evaluation subtracts the running maximum
margin inside the exponentials, so large sharpness values stay finite.
"""

from dataclasses import dataclass

import numpy as np


class DegenerateGeometryError(ValueError):
    """Raised when an input shape has no usable interior or is unbounded."""


def _as_matrix(x, name):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a matrix")
    return arr


@dataclass(frozen=True)
class Halfspace:
    """Region a.s + b <= 1 with outward direction a."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = np.asarray(self.normal, dtype=float)
        if a.ndim != 1 or a.shape[0] not in (2, 3):
            raise ValueError("halfspace normal must have length 2 or 3")
        if np.linalg.norm(a) < 1e-300:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.shape[0]

    def body_value(self, s):
        return float(self.normal @ s) + self.offset

    def body_jet(self, s, order):
        g1 = self.normal
        g2 = np.zeros((self.dim, self.dim)) if order >= 2 else None
        return self.body_value(s), g1, g2, None

    def interior_point(self):
        a = self.normal
        return a * (0.5 - self.offset) / (a @ a)

    def to_dict(self):
        return {"type": "halfspace", "normal": self.normal.tolist(),
                "offset": self.offset}


@dataclass(frozen=True)
class Ellipsoid:
    """Region (s - center)' shape (s - center) <= 1, shape symmetric positive definite."""

    shape: np.ndarray
    center: np.ndarray = None

    def __post_init__(self):
        mat = _as_matrix(self.shape, "shape")
        n = mat.shape[0]
        if mat.shape != (n, n) or n not in (2, 3):
            raise ValueError("shape matrix must be 2x2 or 3x3")
        if np.max(np.abs(mat - mat.T)) > 1e-10 * max(1.0, np.max(np.abs(mat))):
            raise ValueError("shape matrix must be symmetric")
        mat = 0.5 * (mat + mat.T)
        eigs = np.linalg.eigvalsh(mat)
        if eigs[0] <= 0.0:
            raise ValueError("shape matrix must be positive definite")
        center = np.zeros(n) if self.center is None else np.asarray(self.center, dtype=float)
        if center.shape != (n,):
            raise ValueError("center length must match shape matrix")
        object.__setattr__(self, "shape", mat)
        object.__setattr__(self, "center", center)

    @property
    def dim(self):
        return self.shape.shape[0]

    def body_value(self, s):
        r = s - self.center
        return float(r @ self.shape @ r)

    def body_jet(self, s, order):
        r = s - self.center
        value = float(r @ self.shape @ r)
        g1 = 2.0 * (self.shape @ r)
        g2 = 2.0 * self.shape if order >= 2 else None
        return value, g1, g2, None

    def interior_point(self):
        return self.center.copy()

    def to_dict(self):
        return {"type": "ellipsoid", "shape": self.shape.tolist(),
                "center": self.center.tolist()}


@dataclass(frozen=True)
class SmoothPolytope:
    """Soft-max of row margins a_i.s + b_i with sharpness kappa.

    The exact polytope {a_i.s + b_i <= 0 for all i} must be bounded with a
    nonempty interior; the unit sublevel set of F is a padded superset of
    it that tends to the polytope as kappa grows.
    """

    normals: np.ndarray
    offsets: np.ndarray
    sharpness: float

    def __post_init__(self):
        normals = _as_matrix(self.normals, "normals")
        offsets = np.asarray(self.offsets, dtype=float)
        n_rows, dim = normals.shape
        if dim not in (2, 3):
            raise ValueError("polytope rows must live in 2 or 3 dimensions")
        if offsets.shape != (n_rows,):
            raise ValueError("offsets length must match the number of rows")
        if n_rows < dim + 1:
            raise ValueError("a bounded polytope needs at least dim + 1 rows")
        if float(self.sharpness) <= 0.0:
            raise ValueError("sharpness must be positive")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms < 1e-300):
            raise ValueError("polytope rows must have nonzero normals")
        # Boundedness needs the normals to positively span the space; a
        # direction d with a_i.d <= 0 for all i is an escape ray. Probing
        # the axes and the negated row directions catches the common cases;
        # interior_point() raises on the rest when its descent diverges.
        probes = np.vstack([np.eye(dim), -np.eye(dim), -normals / norms[:, None]])
        if np.any(np.all(normals @ probes.T < 1e-10, axis=0)):
            raise DegenerateGeometryError("polytope appears unbounded")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "sharpness", float(self.sharpness))

    @property
    def dim(self):
        return self.normals.shape[1]

    def _margins(self, s):
        return self.normals @ s + self.offsets

    def body_value(self, s):
        return self.body_jet(s, 0)[0]

    def body_jet(self, s, order):
        k = self.sharpness
        m = self._margins(s)
        c = np.max(m)
        z = np.exp(k * (m - c))
        total = np.sum(z)
        value = float(c + (np.log(total) - np.log(m.shape[0])) / k) + 1.0
        w = z / total
        g1 = self.normals.T @ w
        g2 = None
        g3 = None
        if order >= 2:
            d2 = self.normals.T @ (w[:, None] * self.normals)
            g2 = k * (d2 - np.outer(g1, g1))
            if order >= 3:
                t3 = np.einsum("i,ia,ib,ic->abc", w, self.normals,
                               self.normals, self.normals)
                outer3 = (np.einsum("ab,c->abc", d2, g1)
                          + np.einsum("ac,b->abc", d2, g1)
                          + np.einsum("bc,a->abc", d2, g1))
                g3 = k * k * (t3 - outer3
                              + 2.0 * np.einsum("a,b,c->abc", g1, g1, g1))
        return value, g1, g2, g3

    def interior_point(self):
        """Deepest point of the soft shape (minimizer of F), cached.

        Found by a damped, regularized Newton descent on the convex F,
        started from the least-squares zero-margin point. Divergence means
        the polytope is unbounded.
        """
        cached = _interior_cache.get(id(self))
        if cached is not None and cached[0] is self:
            return cached[1].copy()
        p = np.linalg.lstsq(self.normals, -self.offsets, rcond=None)[0]
        for _ in range(200):
            value, g1, g2, _ = self.body_jet(p, 2)
            if np.linalg.norm(g1) <= 1e-12:
                break
            step = np.linalg.solve(g2 + 1e-9 * np.eye(self.dim), -g1)
            t = 1.0
            for _ in range(60):
                cand = p + t * step
                if self.body_jet(cand, 0)[0] <= value - 1e-4 * t * float(g1 @ -step):
                    break
                t *= 0.5
            p = p + t * step
            if np.linalg.norm(p) > 1e6:
                raise DegenerateGeometryError("polytope appears unbounded")
        if self.body_jet(p, 0)[0] >= 1.0:
            raise DegenerateGeometryError("polytope has no strictly interior point")
        _interior_cache[id(self)] = (self, p.copy())
        return p

    def to_dict(self):
        return {"type": "polytope", "normals": self.normals.tolist(),
                "offsets": self.offsets.tolist(), "sharpness": self.sharpness}


# Keyed by id with the primitive kept alive in the value, so a recycled id
# cannot alias a dead object.
_interior_cache = {}


def primitive_from_dict(data):
    kind = data.get("type")
    if kind == "halfspace":
        return Halfspace(np.asarray(data["normal"], dtype=float), data["offset"])
    if kind == "ellipsoid":
        return Ellipsoid(np.asarray(data["shape"], dtype=float),
                         np.asarray(data["center"], dtype=float))
    if kind == "polytope":
        return SmoothPolytope(np.asarray(data["normals"], dtype=float),
                              np.asarray(data["offsets"], dtype=float),
                              data["sharpness"])
    raise ValueError(f"unknown primitive type {kind!r}")
