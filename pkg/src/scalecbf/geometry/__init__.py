"""Shapes as scaling functions, rigid frames, world-frame jets, ellipsoid fits."""

from .frames import Frame, flatten_theta, theta_rates
from .mvee import MveeResult, mvee
from .primitives import (DegenerateGeometryError, Ellipsoid, Halfspace,
                         SmoothPolytope, primitive_from_dict)
from .world import ScalingJet, eval_scaling, gradient_nonzero_outside

__all__ = [
    "DegenerateGeometryError",
    "Ellipsoid",
    "Frame",
    "Halfspace",
    "MveeResult",
    "ScalingJet",
    "SmoothPolytope",
    "eval_scaling",
    "flatten_theta",
    "gradient_nonzero_outside",
    "mvee",
    "primitive_from_dict",
    "theta_rates",
]
