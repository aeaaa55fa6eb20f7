"""Minimum-volume enclosing ellipsoid of a finite point set.

Solves for the ellipsoid {p : ||D p + d|| <= 1} of least volume containing
the points, by iterative reweighting on the lifted scatter matrix
(Khachiyan's scheme with away steps on the active support). The result
also carries the equivalent quadratic form: shape = D @ D and
center = -inv(D) @ d, so (p - center)' shape (p - center) <= 1 describes
the same set.
"""

from dataclasses import dataclass

import numpy as np

from .primitives import DegenerateGeometryError, Ellipsoid


@dataclass(frozen=True)
class MveeResult:
    """Optimal ellipsoid in both matrix-offset and quadratic forms."""

    D: np.ndarray
    d: np.ndarray
    shape: np.ndarray
    center: np.ndarray
    residual: float

    def ellipsoid(self):
        return Ellipsoid(self.shape, self.center)


def _sqrtm_spd(mat):
    vals, vecs = np.linalg.eigh(mat)
    return (vecs * np.sqrt(np.maximum(vals, 0.0))) @ vecs.T


def mvee(points, tol=1e-12, max_iter=200000):
    """Fit the minimum-volume enclosing ellipsoid of the given points.

    points: array-like (m, dim) with dim 2 or 3 and m >= dim + 1 affinely
    independent rows. tol bounds the relative optimality gap of the
    reweighting iteration; the returned form is rescaled afterwards so
    containment holds exactly up to roundoff regardless of tol.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValueError("points must be an (m, 2) or (m, 3) array")
    m, dim = pts.shape
    if m < dim + 1:
        raise DegenerateGeometryError(
            f"need at least {dim + 1} points in {dim}D, got {m}")
    spread = pts - pts.mean(axis=0)
    if np.linalg.matrix_rank(spread, tol=1e-9 * max(1.0, np.abs(pts).max())) < dim:
        raise DegenerateGeometryError("points are affinely dependent")

    lifted = np.hstack([pts, np.ones((m, 1))])
    u = np.full(m, 1.0 / m)
    target = dim + 1.0
    for _ in range(max_iter):
        x = lifted.T @ (u[:, None] * lifted)
        xinv = np.linalg.inv(x)
        scores = np.einsum("ja,ab,jb->j", lifted, xinv, lifted)
        j_up = int(np.argmax(scores))
        eps_up = scores[j_up] / target - 1.0
        support = u > 0.0
        j_dn_local = int(np.argmin(scores[support]))
        j_dn = int(np.flatnonzero(support)[j_dn_local])
        eps_dn = 1.0 - scores[j_dn] / target
        if eps_up <= tol and eps_dn <= tol:
            break
        if eps_up >= eps_dn:
            j = j_up
            step = (scores[j] - target) / (target * (scores[j] - 1.0))
        else:
            j = j_dn
            step = (scores[j] - target) / (target * (scores[j] - 1.0))
            step = max(step, -u[j] / (1.0 - u[j]))
        u *= 1.0 - step
        u[j] += step

    center = pts.T @ u
    scatter = pts.T @ (u[:, None] * pts) - np.outer(center, center)
    form = np.linalg.inv(scatter) / dim
    form = 0.5 * (form + form.T)
    # Containment can be off by the iteration gap; grow the ellipsoid to
    # cover the worst point exactly (never shrink below the fitted form).
    rel = pts - center
    worst = float(np.max(np.einsum("ja,ab,jb->j", rel, form, rel)))
    if worst > 1.0:
        form = form / worst
    dmat = _sqrtm_spd(form)
    dvec = -dmat @ center
    residual = float(np.max(np.linalg.norm(pts @ dmat + dvec, axis=1)) - 1.0)
    return MveeResult(D=dmat, d=dvec, shape=dmat @ dmat, center=center,
                      residual=residual)
