"""Constraint rows for the safety filter.

A row encodes a'u >= b. Barrier rows come from the scaling-factor
sensitivities through a second-order barrier construction with linear
class-K gains; first-order rows cover velocity style limits.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

DEGENERATE_ROW_TOL = 1e-12

_AXIS_ROWS = {}


def _axis_rows(n):
    """Cached (+e_i, -e_i) unit-row pairs, read only."""
    cached = _AXIS_ROWS.get(n)
    if cached is None:
        cached = []
        for i in range(n):
            plus = np.zeros(n)
            plus[i] = 1.0
            plus.flags.writeable = False
            minus = np.zeros(n)
            minus[i] = -1.0
            minus.flags.writeable = False
            cached.append((plus, minus))
        _AXIS_ROWS[n] = cached
    return cached


@dataclass(frozen=True)
class HocbfGains:
    """Barrier offset and the two linear class-K gains."""

    alpha0: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        if not self.alpha0 > 1.0:
            raise ValueError("alpha0 must exceed 1")
        if self.gamma1 <= 0.0 or self.gamma2 <= 0.0:
            raise ValueError("gains must be positive")


@dataclass(frozen=True)
class ConstraintRow:
    """a'u >= b; soft rows carry a positive slack weight."""

    a: np.ndarray
    b: float
    kind: str
    soft: float = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).ravel()
        b = float(self.b)
        if not np.isfinite(a).all() or not math.isfinite(b):
            raise ValueError("row entries must be finite")
        if self.soft is not None and not self.soft > 0.0:
            raise ValueError("soft weight must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def barrier_value(pair, sens, gains):
    """h = alpha* - alpha0 for the pair's current solution."""
    return sens.solution.alpha - gains.alpha0


def second_order_row(h, grad, hess, taskmap, x, gains, kind="hocbf",
                     quad=None):
    """Row for a relative-degree-2 barrier given theta-space derivatives.

    grad and hess are the barrier's first and second derivatives with
    respect to the task-mapped theta block. The row states
    h_ddot + (g1+g2) h_dot + g1 g2 h >= 0 rearranged into a'u >= b.
    quad, when given, is the precomputed theta_dot' hess theta_dot
    scalar and hess may then be None.
    """
    grad = np.asarray(grad, dtype=float)
    theta_dot = taskmap.theta_dot(x)
    a_vec = taskmap.input_map(x).T @ grad
    nrm2 = float(a_vec @ a_vec)
    if nrm2 < DEGENERATE_ROW_TOL * DEGENERATE_ROW_TOL:
        if h >= 0.0:
            log.warning("dropping degenerate %s row (|a|=%.1e, h=%.3g)",
                        kind, math.sqrt(nrm2), h)
        return None
    h_dot = float(grad @ theta_dot)
    if quad is None:
        quad = float(theta_dot @ hess @ theta_dot)
    settled = quad + float(grad @ taskmap.drift(x))
    g1, g2 = gains.gamma1, gains.gamma2
    b = -settled - (g1 + g2) * h_dot - g1 * g2 * h
    return ConstraintRow(a_vec, b, kind)


def hocbf_row(pair, sens, taskmap, x, gains):
    """Barrier row for one primitive pair.

    The constraint frame is held fixed; only the task-mapped block of
    theta moves with the state. sens.hess may be the full matrix or
    already restricted to that leading block.
    """
    n_a = pair.n_theta_a
    grad = sens.grad[:n_a]
    hess = np.asarray(sens.hess)[:n_a, :n_a]
    h = barrier_value(pair, sens, gains)
    return second_order_row(h, grad, hess, taskmap, x, gains)


def first_order_limit_rows(limits, gamma):
    """Rows h_dot >= -gamma h for affine limit functions.

    limits iterates over (value, u_coefficient, drift) triples with
    h_dot = u_coefficient'u + drift.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    rows = []
    for value, coeff, drift in limits:
        rows.append(ConstraintRow(np.asarray(coeff, dtype=float),
                                  -gamma * float(value) - float(drift),
                                  "first_order_limit"))
    return rows


def velocity_box_rows(v, lower, upper, gamma):
    """First-order rows keeping each velocity component in [lower, upper]."""
    v = np.asarray(v, dtype=float)
    lower = np.broadcast_to(np.asarray(lower, dtype=float), v.shape)
    upper = np.broadcast_to(np.asarray(upper, dtype=float), v.shape)
    limits = []
    vals = v.tolist()
    for i, (plus, minus) in enumerate(_axis_rows(v.size)):
        hi = float(upper[i])
        lo = float(lower[i])
        if math.isfinite(hi):
            limits.append((hi - vals[i], minus, 0.0))
        if math.isfinite(lo):
            limits.append((vals[i] - lo, plus, 0.0))
    return first_order_limit_rows(limits, gamma)
