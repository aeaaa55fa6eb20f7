"""Barrier rows, smooth-min aggregation, circulation, filter assembly."""

from .circulation import (BoxProjector, CirculationSpec, circulation_row,
                          equilibrium_projector, skew_matrix)
from .filter import (FilterResult, SafetyFilterProblem, assemble_filter,
                     solve_filter)
from .rows import (ConstraintRow, HocbfGains, barrier_value,
                   first_order_limit_rows, hocbf_row, second_order_row,
                   velocity_box_rows)
from .smoothmin import (BarrierDiagnostics, smooth_min,
                        smooth_min_derivatives, smooth_min_hocbf_row,
                        smooth_min_quad_rate)
from .taskmap import PlanarPointMap

__all__ = [
    "BarrierDiagnostics", "BoxProjector", "CirculationSpec",
    "ConstraintRow", "FilterResult", "HocbfGains", "PlanarPointMap",
    "SafetyFilterProblem", "assemble_filter", "barrier_value",
    "circulation_row", "equilibrium_projector", "first_order_limit_rows",
    "hocbf_row", "second_order_row", "skew_matrix", "smooth_min",
    "smooth_min_derivatives", "smooth_min_hocbf_row",
    "smooth_min_quad_rate", "solve_filter", "velocity_box_rows",
]
