"""Rotation fields of surfaces in isothermal charts: extended Darboux system, reduction to
second-order equations for y3, finite-difference maximum-principle checks and nodal lines."""

from .darboux import assemble, field_from_bending, minor_det, rank, rotation_field_sampler
from .dsl import ParseError, parse
from .errors import DegenerateChart, HypothesisViolation, NonIsothermalChart, NotElliptic, NumericalFailure
from .frames import frame
from .jets import Jet3, seed_variable
from .reduction import assemble_pdes, reduce
from .surfaces import PRESETS, SurfaceDef, load_surface, preset

__version__ = "0.1.0"

__all__ = [
    "Jet3",
    "seed_variable",
    "parse",
    "ParseError",
    "SurfaceDef",
    "PRESETS",
    "preset",
    "load_surface",
    "frame",
    "assemble",
    "rank",
    "minor_det",
    "field_from_bending",
    "rotation_field_sampler",
    "reduce",
    "assemble_pdes",
    "NonIsothermalChart",
    "DegenerateChart",
    "HypothesisViolation",
    "NotElliptic",
    "NumericalFailure",
]
