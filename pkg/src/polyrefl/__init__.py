"""Quasiconformal reflection invariants of polygonal lines.

The package computes, for closed polygons and polygonal lines with two
rays to infinity, the four classical reflection invariants (Grunsky
norm, Teichmueller norm, reflection coefficient, reciprocal Fredholm
eigenvalue), together with the conformal-map and Grunsky-matrix
machinery behind them, snowflake-type fractal lines, and curvature
bounds for analytic arcs.
"""

from .geometry import (
    AngleFactor,
    Classification,
    DegenerateEdgeError,
    GeometryError,
    PolygonalLine,
    RhombusConstruction,
    classify,
    deviation,
    interior_angles,
    kernel,
    line_from_json,
    merge_collinear,
    rhombus_at_vertex,
    validate_simple,
)

__all__ = [
    "AngleFactor",
    "Classification",
    "DegenerateEdgeError",
    "GeometryError",
    "PolygonalLine",
    "RhombusConstruction",
    "classify",
    "deviation",
    "interior_angles",
    "kernel",
    "line_from_json",
    "merge_collinear",
    "rhombus_at_vertex",
    "validate_simple",
]

__version__ = "0.1.0"
