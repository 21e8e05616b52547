"""Closed-form reflection invariants of polygonal lines.

Four classical quantities measure how well a curve supports
quasiconformal reflection: the Grunsky norm kappa, the Teichmuller norm
k, the reflection coefficient q, and the reciprocal 1/rho of the least
nontrivial Fredholm eigenvalue.  For unbounded rectilinear polygons
(under the hypotheses enforced here) all four coincide and are given by
explicit angle formulas; bounded polygons get two-sided bounds from
corner data and a rhombic construction at the sharpest vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AngleFactor,
    GeometryError,
    PolygonalLine,
    classify,
    deviation,
    distance_to_line,
    interior_angles,
    merge_collinear,
    rhombus_at_vertex,
    validate_simple,
    visible_vertices,
)

NON_INFORMATIVE = "upper bound reaches 1 and is non-informative"


class InvariantError(ValueError):
    pass


@dataclass(frozen=True)
class InvariantReport:
    """The four invariants with provenance.

    An exact report stores one value in all four slots.  A bounds
    report also stores one value (the certified lower bound) in all
    four slots and carries the pair (lower, upper); ``downgraded``
    records that a stronger claim was attempted and lost a hypothesis
    check on the way.
    """

    grunsky: float
    teichmuller: float
    reflection: float
    fredholm_reciprocal: float
    status: str
    source: str
    lower: float | None = None
    upper: float | None = None
    hypothesis_notes: tuple = ()
    downgraded: bool = False

    def __post_init__(self):
        vals = (self.grunsky, self.teichmuller, self.reflection,
                self.fredholm_reciprocal)
        for v in vals:
            if not 0.0 <= v < 1.0:
                raise InvariantError(f"invariant {v!r} outside [0, 1)")
        if self.fredholm_reciprocal > self.reflection:
            raise InvariantError("1/rho must not exceed q")
        if self.status == "exact":
            if len(set(vals)) != 1:
                raise InvariantError("exact report with unequal values")
        elif self.status == "bounds":
            if self.lower is None or self.upper is None:
                raise InvariantError("bounds report missing lower/upper")
            if self.lower > self.upper:
                raise InvariantError("lower bound exceeds upper bound")
        else:
            raise InvariantError(f"unknown status {self.status!r}")

    @property
    def value(self) -> float:
        return self.reflection

    def to_json(self) -> dict:
        out = {
            "kappa": self.grunsky,
            "k": self.teichmuller,
            "q": self.reflection,
            "rho_inv": self.fredholm_reciprocal,
            "status": self.status,
            "source": self.source,
            "notes": list(self.hypothesis_notes),
        }
        if self.status == "bounds":
            out["lower"] = self.lower
            out["upper"] = self.upper
        return out


def exact_report(value: float, source: str, notes=()) -> InvariantReport:
    value = float(value)
    return InvariantReport(
        grunsky=value,
        teichmuller=value,
        reflection=value,
        fredholm_reciprocal=value,
        status="exact",
        source=source,
        hypothesis_notes=tuple(notes),
    )


def bounds_report(lower: float, upper: float, source: str, notes=(),
                  downgraded: bool = False) -> InvariantReport:
    lower = float(lower)
    notes = list(notes)
    if upper >= 1.0 and NON_INFORMATIVE not in notes:
        notes.append(NON_INFORMATIVE)
    return InvariantReport(
        grunsky=lower,
        teichmuller=lower,
        reflection=lower,
        fredholm_reciprocal=lower,
        status="bounds",
        source=source,
        lower=lower,
        upper=float(upper),
        hypothesis_notes=tuple(notes),
        downgraded=downgraded,
    )


def _require_unbounded(line: PolygonalLine):
    if not line.unbounded:
        raise InvariantError(
            "this formula applies to unbounded polygonal lines only"
        )


def _finite(angles) -> list[AngleFactor]:
    return [f for f in angles if not f.at_infinity]


def _alpha_inf(angles) -> float:
    for f in angles:
        if f.at_infinity:
            return f.value
    raise InvariantError("angle data carries no factor at infinity")


def _rhombus_b_p(line: PolygonalLine, angles, reading: str) -> float:
    """b_P = max(1 - adjoint factor) at a sharpest (smallest-angle)
    vertex, via the rhombus inscribed there."""
    candidates = [
        f for f in angles
        if isinstance(f.location, int) and f.value < 1.0
    ]
    if not candidates:
        raise InvariantError("no vertex angle below pi for the rhombus")
    sharpest = min(candidates, key=lambda f: f.value)
    rh = rhombus_at_vertex(line, sharpest.location, 1.0, reading=reading)
    return max(1.0 - a for a in rh.adjoint_factors)


def _fallback_bounds(line, angles, source, notes, reading="default"):
    """Two-sided corner bounds used when an exactness hypothesis fails:
    lower from the worst corner, upper from the rhombus at the sharpest
    vertex (1 when no rhombus fits)."""
    lower = deviation(angles)
    try:
        upper = lower + _rhombus_b_p(line, angles, reading)
    except (InvariantError, GeometryError):
        upper = 1.0
    return bounds_report(lower, upper, source, notes, downgraded=True)


def convex_unbounded(line: PolygonalLine, angles=None,
                     reading: str = "default") -> InvariantReport:
    """Exact invariants of an unbounded convex polygon: 1 minus the
    least of all |angle factors|, the factor at infinity included.

    A failed convexity hypothesis downgrades to two-sided corner
    bounds instead of raising.
    """
    _require_unbounded(line)
    if angles is None:
        angles = interior_angles(line)
    fin = [f for f in _finite(angles) if not f.removable]
    if not fin:
        return exact_report(0.0, "T1", ["straight boundary"])
    a_inf = _alpha_inf(angles)
    cls = classify(line)
    bad = None
    if cls.kind != "convex":
        bad = f"domain classified {cls.kind}, not convex"
    elif any(not 0.0 < f.value < 1.0 for f in fin):
        bad = "a finite vertex angle is not below pi"
    elif not -1.0 < a_inf < 0.0:
        bad = f"angle factor at infinity {a_inf:.6g} outside (-1, 0)"
    if bad is not None:
        return _fallback_bounds(
            line, angles, "T5",
            [f"convexity hypothesis failed: {bad}"], reading,
        )
    least = min([abs(f.value) for f in fin] + [abs(a_inf)])
    return exact_report(1.0 - least, "T1")


def concave_unbounded(line: PolygonalLine, angles=None,
                      reading: str = "default") -> InvariantReport:
    """Exact invariants of the complement of an unbounded convex
    polygon: |beta| - 1 for the largest |angle factor| beta, the factor
    at infinity included."""
    _require_unbounded(line)
    if angles is None:
        angles = interior_angles(line)
    fin = [f for f in _finite(angles) if not f.removable]
    if not fin:
        return exact_report(0.0, "T1", ["straight boundary"])
    a_inf = _alpha_inf(angles)
    cls = classify(line)
    if cls.kind != "concave":
        return _fallback_bounds(
            line, angles, "T5",
            [f"concavity hypothesis failed: domain classified {cls.kind}"],
            reading,
        )
    beta = max([abs(f.value) for f in fin] + [abs(a_inf)])
    return exact_report(beta - 1.0, "T1")


def rectilinear_unbounded(
    line: PolygonalLine,
    angles=None,
    *,
    tail_sup: float | None = None,
    extra_ray_directions=(),
) -> InvariantReport:
    """Exact invariants of an unbounded rectilinear polygon: the angle
    deviation max(sup |1 - alpha_n|, |1 - |alpha_inf||).

    A countable vertex set is declared by passing the truncation plus
    ``tail_sup``, the supremum of |1 - alpha| over the omitted tail; in
    that case every non-removable vertex of the truncation must see
    infinity along some candidate ray, and a failed visibility check
    downgrades the report to a lower bound.
    """
    _require_unbounded(line)
    if angles is None:
        angles = interior_angles(line)
    value = deviation(angles)
    source = "T2"
    if tail_sup is not None:
        tail_sup = float(tail_sup)
        if not 0.0 <= tail_sup:
            raise InvariantError("tail supremum must be nonnegative")
        value = max(value, tail_sup)
        source = "T3"
    if value >= 1.0:
        raise InvariantError(
            f"angle deviation {value:.6g} is not below 1; "
            "outside the scope of the exact formula"
        )
    if tail_sup is not None:
        visible = set(visible_vertices(line, extra_ray_directions))
        hidden = [
            f.location
            for f in _finite(angles)
            if isinstance(f.location, int) and not f.removable
            and f.location not in visible
        ]
        if hidden:
            return bounds_report(
                value, 1.0, source,
                [
                    "ray visibility toward infinity could not be "
                    f"confirmed at vertices {hidden}; the deviation is "
                    "reported as a lower bound only"
                ],
                downgraded=True,
            )
    return exact_report(value, source)


def starlike_unbounded(line: PolygonalLine, angles=None) -> InvariantReport:
    """Exact invariants of an unbounded starlike rectilinear polygon:
    the angle deviation beta, required to lie in (0, 1)."""
    _require_unbounded(line)
    if angles is None:
        angles = interior_angles(line)
    cls = classify(line)
    if cls.kind not in ("convex", "starlike"):
        raise InvariantError(
            f"domain classified {cls.kind}; a nonempty kernel is required"
        )
    beta = deviation(angles)
    if not 0.0 < beta < 1.0:
        raise InvariantError(
            f"angle deviation {beta:.6g} outside (0, 1)"
        )
    return exact_report(beta, "T4")


def bounded_polygon(line: PolygonalLine, angles=None,
                    reading: str = "default") -> InvariantReport:
    """Two-sided invariant bounds for a bounded polygon.

    Lower bound: the worst corner, max |1 - alpha_j|.  Upper bound:
    lower + b_P with b_P read off the rhombus inscribed at a sharpest
    vertex.  An upper bound reaching 1 is reported verbatim with a
    non-informative note rather than clamped.
    """
    if not line.closed:
        raise InvariantError("bounded-polygon bounds need a closed line")
    if angles is None:
        angles = interior_angles(line)
    working = [f for f in angles if not f.removable]
    if not working:
        raise InvariantError(
            "every angle merged away; the polygon is degenerate"
        )
    lower = max(abs(1.0 - f.value) for f in working)
    notes = []
    upper = lower + _rhombus_b_p(line, angles, reading)
    merged = merge_collinear(line)
    sides = np.abs(np.diff(np.append(merged.vertices, merged.vertices[0])))
    rectangle = (
        len(working) == 4
        and all(abs(f.value - 0.5) <= 1e-12 for f in working)
    )
    if rectangle and float(sides.max() / sides.min()) > 2.76:
        notes.append(
            "side ratio exceeds 2.76: the true reflection coefficient "
            "of such a rectangle is known to exceed the corner lower "
            "bound 1/2"
        )
    return bounds_report(lower, upper, "T5", notes)


def smooth_quasicircle(corner_angles, reading: str = "default"
                       ) -> InvariantReport:
    """Two-sided invariant bounds for a bounded piecewise-smooth curve
    from its corner data alone.

    Each corner contributes |1 - alpha|; smooth points (alpha = 1)
    contribute nothing, and a list with no genuine corner is rejected
    since the bounds require at least one singular point.  The upper
    bound adds b_P for the sharpest corner opening min(alpha, 2-alpha).
    """
    factors = []
    for i, a in enumerate(corner_angles):
        v = float(a.value) if isinstance(a, AngleFactor) else float(a)
        if not 0.0 < v < 2.0:
            raise InvariantError(
                f"corner factor {v:.6g} outside (0, 2)"
            )
        factors.append(v)
    if not factors:
        raise InvariantError("at least one corner angle is required")
    genuine = [v for v in factors if abs(v - 1.0) > 1e-9]
    if not genuine:
        raise InvariantError(
            "all corners are smooth; a singular point is required"
        )
    lower = max(abs(1.0 - v) for v in genuine)
    alpha_eff = min(min(v, 2.0 - v) for v in genuine)
    b_p = alpha_eff if reading == "default" else 1.0 - alpha_eff
    if reading not in ("default", "supplementary"):
        raise InvariantError(f"unknown adjoint reading {reading!r}")
    return bounds_report(lower, lower + b_p, "T6")


def corner_lower_bound(alpha: float) -> float:
    """|1 - |alpha||: a lower bound for 1/rho of any curve with an
    interior corner of angle pi*alpha."""
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise InvariantError(f"corner factor {alpha:.6g} outside (0, 2)")
    return abs(1.0 - abs(alpha))


@dataclass(frozen=True, eq=False)
class SetBoundRequest:
    """A point set E together with polygonal lines that each cover it."""

    set_points: np.ndarray
    covering_lines: tuple

    def __post_init__(self):
        pts = np.asarray(self.set_points, dtype=complex).reshape(-1)
        object.__setattr__(self, "set_points", pts)
        lines = tuple(self.covering_lines)
        object.__setattr__(self, "covering_lines", lines)
        if pts.size == 0:
            raise InvariantError("the point set is empty")
        if not lines:
            raise InvariantError("no covering line supplied")
        for k, ln in enumerate(lines):
            scale = max(ln.scale(), float(np.abs(pts).max()), 1.0)
            far = float(distance_to_line(ln, pts).max())
            if far > 1e-9 * scale:
                raise InvariantError(
                    f"covering line {k} misses the set by {far:.3g}"
                )


@dataclass(frozen=True)
class SetBoundResult:
    value: float
    notes: tuple = ()


def set_reflection_bound(request: SetBoundRequest, reports,
                         *, contains_extremal_arcs: bool = False
                         ) -> SetBoundResult:
    """Upper bound for the reflection coefficient of a compact set:
    the minimum of q over the covering lines (exact value when exact,
    certified upper bound otherwise).

    ``contains_extremal_arcs`` declares that E contains the boundary
    arcs forming the extremal angle of a minimizing line, in which case
    the bound is attained and an equality note is attached.
    """
    reports = list(reports)
    if len(reports) != len(request.covering_lines):
        raise InvariantError(
            "reports do not correspond one-to-one to covering lines"
        )
    best = None
    for rep in reports:
        q = rep.reflection if rep.status == "exact" else rep.upper
        best = q if best is None else min(best, q)
    notes = []
    if contains_extremal_arcs:
        notes.append(
            "the set contains the arcs forming the extremal angle, so "
            "the bound is attained"
        )
    return SetBoundResult(float(best), tuple(notes))


def invariants_of(
    line: PolygonalLine,
    *,
    angles=None,
    reading: str = "default",
    tail_sup: float | None = None,
    extra_ray_directions=(),
) -> InvariantReport:
    """Route a polygonal line to the sharpest applicable formula.

    Closed lines get the two-sided bounds; unbounded lines get the
    exact convex/concave value when the shape qualifies, otherwise the
    exact angle-deviation formula (countable tails via ``tail_sup``).
    """
    if not validate_simple(line):
        raise GeometryError("the line crosses itself; invariants need a simple boundary")
    if line.closed:
        return bounded_polygon(line, angles, reading)
    if not line.unbounded:
        raise InvariantError(
            "finite open arcs carry no interior; no formula applies"
        )
    if angles is None:
        angles = interior_angles(line)
    if all(f.removable for f in _finite(angles)):
        return exact_report(0.0, "T2", ["straight boundary"])
    cls = classify(line)
    if cls.kind == "convex" and tail_sup is None:
        return convex_unbounded(line, angles, reading)
    if cls.kind == "concave" and tail_sup is None:
        return concave_unbounded(line, angles, reading)
    return rectilinear_unbounded(
        line, angles, tail_sup=tail_sup,
        extra_ray_directions=extra_ray_directions,
    )
