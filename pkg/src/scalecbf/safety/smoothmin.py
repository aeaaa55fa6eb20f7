"""Smooth-minimum aggregation of several barriers into one.

phi under-approximates min(h_i): the shifted value phi + phi0 always
sits in [h_min - ln(K)/eta, h_min]. Softmin weights feed the gradient
and curvature aggregation for the combined barrier row.
"""

from dataclasses import dataclass

import numpy as np

from .rows import second_order_row

_SANDWICH_SLOP = 1e-12


def smooth_min(values, eta, phi0):
    """Returns (phi, weights) for the barrier stack."""
    h = np.asarray(values, dtype=float)
    if h.size < 1:
        raise ValueError("need at least one barrier value")
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    h_min = h.min()
    z = np.exp(-eta * (h - h_min))
    total = z.sum()
    phi = -np.log(total) / eta + h_min - phi0
    return float(phi), z / total


def smooth_min_derivatives(grads, hesses, weights, eta):
    """Gradient and Hessian of phi from per-barrier theta derivatives.

    The curvature carries the softmin-weight term
    -eta (sum w_i g_i g_i' - g g') on top of the weighted Hessians.
    """
    grads = [np.asarray(g, dtype=float) for g in grads]
    stacked = np.stack(grads)
    g_phi = weights @ stacked
    h_phi = sum(w * np.asarray(h, dtype=float)
                for w, h in zip(weights, hesses))
    outer = np.einsum("k,ka,kb->ab", weights, stacked, stacked)
    h_phi = h_phi - eta * (outer - np.outer(g_phi, g_phi))
    return g_phi, h_phi


def smooth_min_quad_rate(weights, quads, rates, eta):
    """v' H_phi v from per-barrier directional scalars.

    quads are v' H_i v and rates are g_i' v for a shared direction v.
    The softmin curvature correction enters through the rate variance,
    so H_phi itself never has to be formed.
    """
    w = np.asarray(weights, dtype=float)
    q = np.asarray(quads, dtype=float)
    r = np.asarray(rates, dtype=float)
    r_bar = float(w @ r)
    return float(w @ q) - eta * (float(w @ (r * r)) - r_bar * r_bar)


def smooth_min_hocbf_row(values, grads, hesses, eta, phi0, taskmap, x,
                         gains):
    """One barrier row for the aggregate phi.

    values are the individual barrier values h_i; grads and hesses are
    their derivatives with respect to the shared task-mapped theta
    block. Returns (row, phi, weights); row is None when degenerate.
    """
    phi, weights = smooth_min(values, eta, phi0)
    g_phi, h_phi = smooth_min_derivatives(grads, hesses, weights, eta)
    row = second_order_row(phi, g_phi, h_phi, taskmap, x, gains)
    return row, phi, weights


@dataclass(frozen=True)
class BarrierDiagnostics:
    """Per-step barrier bookkeeping for the trajectory log."""

    barriers: tuple
    psi1: tuple
    phi: float
    phi0: float
    eta: float
    active: tuple
    eq_distance: float

    def __post_init__(self):
        object.__setattr__(self, "barriers", tuple(self.barriers))
        object.__setattr__(self, "psi1", tuple(self.psi1))
        object.__setattr__(self, "active", tuple(self.active))
        h_min = min(self.barriers)
        shifted = self.phi + self.phi0
        count = len(self.barriers)
        assert shifted <= h_min + _SANDWICH_SLOP
        assert shifted >= h_min - np.log(count) / self.eta - _SANDWICH_SLOP

    @property
    def h_min(self):
        return min(self.barriers)
