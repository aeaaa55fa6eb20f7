"""Minimal-scaling solvers and derivatives of the optimum."""

from .derivatives import (AlphaSensitivity, alpha_directional, alpha_gradient,
                          alpha_hessian, alpha_sensitivity)
from .pair import PrimitivePair
from .solvers import (MinScalingSolution, SolverFailureError, newton_kkt,
                      rimon_closed_form, solve_min_scaling, world_ellipsoid,
                      world_halfspace)

__all__ = [
    "AlphaSensitivity",
    "MinScalingSolution",
    "PrimitivePair",
    "SolverFailureError",
    "alpha_directional",
    "alpha_gradient",
    "alpha_hessian",
    "alpha_sensitivity",
    "newton_kkt",
    "rimon_closed_form",
    "solve_min_scaling",
    "world_ellipsoid",
    "world_halfspace",
]
