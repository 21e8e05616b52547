"""Polygonal lines in the plane and their angle data.

Vertices are stored as complex numbers (x + iy).  A line is a closed
polygon, an open polyline whose two extreme edges are rays to infinity,
or a finite open arc (no rays); traversal order defines the interior,
which lies on the left, where one exists.  Interior angles are
expressed as factors alpha with angle = pi * alpha; the vertex at
infinity of an unbounded line carries a negative factor fixed by the
sum rule  sum_k (1 - alpha_k) = 2  over all vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Absolute incidence tolerance on unit-diameter inputs; all geometric
# predicates scale it by the line's diameter.
TOL = 1e-10

# An angle factor within ANGLE_TOL of 1 marks a removable (collinear) vertex.
ANGLE_TOL = 1e-9

INFINITY = "infinity"
LIMIT = "limit"


class GeometryError(ValueError):
    pass


class DegenerateEdgeError(GeometryError):
    def __init__(self, edge_index: int):
        self.edge_index = edge_index
        super().__init__(f"edge {edge_index} has zero length")


def _as_complex_array(points) -> np.ndarray:
    arr = np.asarray(points)
    if arr.dtype.kind == "c":
        return arr.astype(complex)
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    return arr.astype(complex)


def _cross(a: complex, b: complex) -> float:
    return (a.conjugate() * b).imag


@dataclass(frozen=True)
class AngleFactor:
    """Interior angle factor alpha at a vertex (angle = pi * alpha).

    ``location`` is the vertex index, or "infinity" for the vertex at
    infinity of an unbounded line, or "limit" for a caller-supplied
    limit-vertex value.
    """

    value: float
    location: int | str

    @property
    def removable(self) -> bool:
        return abs(self.value - 1.0) <= ANGLE_TOL

    @property
    def at_infinity(self) -> bool:
        return self.location == INFINITY


@dataclass(frozen=True, eq=False)
class PolygonalLine:
    """A closed polygon, an unbounded polyline with two rays, or a
    finite open arc.

    For an unbounded line, ``ray_directions = (d_start, d_end)`` are the
    unit vectors of the two rays leaving ``vertices[0]`` and
    ``vertices[-1]``; the line is traversed coming in from infinity
    along -d_start and leaving along +d_end, interior on the left.  An
    open line without rays is a finite arc; it bounds no interior and
    supports only the metric and simplicity queries.
    """

    vertices: np.ndarray
    closed: bool = False
    ray_directions: tuple[complex, complex] | None = None

    def __post_init__(self):
        v = _as_complex_array(self.vertices)
        object.__setattr__(self, "vertices", v)
        if not np.all(np.isfinite(v.view(float))):
            raise GeometryError("vertices must have finite coordinates")
        if self.closed:
            if self.ray_directions is not None:
                raise GeometryError("closed line cannot carry rays")
            if len(v) < 3:
                raise GeometryError("closed polygon needs at least 3 vertices")
        elif self.ray_directions is not None:
            if len(v) < 1:
                raise GeometryError("unbounded line needs a vertex")
            d0, d1 = self.ray_directions
            d0, d1 = complex(d0), complex(d1)
            if abs(d0) < TOL or abs(d1) < TOL:
                raise GeometryError("ray directions must be nonzero")
            object.__setattr__(
                self, "ray_directions", (d0 / abs(d0), d1 / abs(d1))
            )
        else:
            if len(v) < 2:
                raise GeometryError("open arc needs at least 2 vertices")

    # -- basic queries ------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def unbounded(self) -> bool:
        return self.ray_directions is not None

    def scale(self) -> float:
        v = self.vertices
        if len(v) == 1:
            return 1.0
        span = max(np.ptp(v.real), np.ptp(v.imag))
        return span if span > 0 else 1.0

    def edges(self) -> list[tuple[complex, complex]]:
        """Finite edges as (start, end) pairs; rays not included."""
        v = self.vertices
        segs = [(v[i], v[i + 1]) for i in range(len(v) - 1)]
        if self.closed:
            segs.append((v[-1], v[0]))
        return segs

    def orientation(self) -> int:
        """+1 for counterclockwise closed polygons, -1 for clockwise.

        Unbounded lines always return +1: their traversal order is the
        convention that puts the interior on the left.
        """
        if not self.closed:
            return 1
        v = self.vertices
        area2 = float(np.sum(_cross_arr(v, np.roll(v, -1))))
        if abs(area2) < TOL * self.scale() ** 2:
            raise GeometryError("degenerate polygon (zero area)")
        return 1 if area2 > 0 else -1

    def reversed(self) -> "PolygonalLine":
        """Traversal reversed; for unbounded lines this selects the
        complementary polygon (interior on the other side)."""
        if self.closed:
            return PolygonalLine(self.vertices[::-1], closed=True)
        if self.ray_directions is None:
            return PolygonalLine(self.vertices[::-1])
        d0, d1 = self.ray_directions
        return PolygonalLine(self.vertices[::-1], ray_directions=(d1, d0))

    def translated(self, offset: complex) -> "PolygonalLine":
        return PolygonalLine(
            self.vertices + offset, self.closed, self.ray_directions
        )

    # -- JSON wire format ----------------------------------------------

    def to_json(self) -> dict:
        obj = {
            "vertices": [[float(z.real), float(z.imag)] for z in self.vertices],
            "closed": self.closed,
            "infinite_vertex": self.unbounded,
        }
        if self.unbounded:
            d0, d1 = self.ray_directions
            obj["ray_directions"] = [[d0.real, d0.imag], [d1.real, d1.imag]]
        return obj


def line_from_json(obj: dict) -> tuple[PolygonalLine, dict[int, float]]:
    """Parse the polygon wire format.

    Returns the line together with any angle overrides as a dict
    {vertex_index: alpha}.
    """
    vertices = _as_complex_array(obj["vertices"])
    closed = bool(obj.get("closed", False))
    rays = None
    if obj.get("infinite_vertex", False):
        rd = obj.get("ray_directions")
        if rd is None:
            raise GeometryError("infinite_vertex requires ray_directions")
        rays = (complex(rd[0][0], rd[0][1]), complex(rd[1][0], rd[1][1]))
        closed = False
    line = PolygonalLine(vertices, closed=closed, ray_directions=rays)
    overrides = {
        int(o["index"]): float(o["alpha"])
        for o in obj.get("angle_overrides", [])
    }
    return line, overrides


# -- segment predicates ------------------------------------------------


def _cross_arr(a, b):
    return a.real * b.imag - a.imag * b.real


def _segments_of(line: PolygonalLine, ray_span: float):
    """All edges as (origin, direction, tmax) triples, rays clipped to
    ray_span; returns (segments, adjacency key per segment)."""
    segs = []
    v = line.vertices
    if line.unbounded:
        d0, d1 = line.ray_directions
        segs.append((v[0], d0 * ray_span, 1.0))
    for i in range(len(v) - 1):
        segs.append((v[i], v[i + 1] - v[i], 1.0))
    if line.closed:
        segs.append((v[-1], v[0] - v[-1], 1.0))
    if line.unbounded:
        segs.append((v[-1], d1 * ray_span, 1.0))
    return segs


def _pair_intersects(p, r, q, s, tol) -> bool:
    """True if segments p + t r (t in [0,1]) and q + u s (u in [0,1])
    meet, with absolute slack tol on endpoints."""
    rxs = _cross(r, s)
    qp = q - p
    lr, ls = abs(r), abs(s)
    if abs(rxs) <= tol * max(lr * ls, 1e-300):
        # parallel; check collinear overlap
        if abs(_cross(qp, r)) > tol * max(lr, 1.0):
            return False
        t0 = (qp.real * r.real + qp.imag * r.imag) / (lr * lr)
        t1 = t0 + (s.real * r.real + s.imag * r.imag) / (lr * lr)
        lo, hi = min(t0, t1), max(t0, t1)
        eps = tol / lr
        return hi >= -eps and lo <= 1.0 + eps
    t = _cross(qp, s) / rxs
    u = _cross(qp, r) / rxs
    et, eu = tol / max(lr, 1e-300), tol / max(ls, 1e-300)
    return -et <= t <= 1.0 + et and -eu <= u <= 1.0 + eu


def validate_simple(line: PolygonalLine, *, tol: float | None = None) -> bool:
    """True iff no two non-adjacent edges intersect and no adjacent pair
    backtracks; zero-length edges raise DegenerateEdgeError."""
    scale = line.scale()
    if tol is None:
        tol = TOL * scale
    span = 1e6 * scale
    segs = _segments_of(line, span)
    m = len(segs)
    for i, (_, r, _) in enumerate(segs):
        if abs(r) <= tol:
            raise DegenerateEdgeError(i)
    # adjacency: consecutive segments share a vertex; for closed lines the
    # first and last are adjacent as well
    for i in range(m):
        for j in range(i + 1, m):
            adjacent = j == i + 1 or (line.closed and i == 0 and j == m - 1)
            pi, ri, _ = segs[i]
            pj, rj, _ = segs[j]
            if adjacent:
                # shared endpoint allowed; reject backtracking overlap.
                # The incoming ray and the first edge both leave their
                # shared vertex, so overlap there means angle 0, not pi.
                if line.unbounded and i == 0 and j == 1:
                    if abs(np.angle(rj / ri)) < 1e-12:
                        return False
                else:
                    ang = np.angle(rj / ri) if j == i + 1 else np.angle(ri / rj)
                    if abs(abs(ang) - np.pi) < 1e-12:
                        return False
                continue
            if _pair_intersects(pi, ri, pj, rj, tol):
                return False
    return True


# -- angles -------------------------------------------------------------


def interior_angles(
    line: PolygonalLine,
    overrides: dict[int, float] | None = None,
    limit_values: Sequence[float] = (),
) -> list[AngleFactor]:
    """Angle factors at every vertex, plus the factor at infinity for
    unbounded lines (fixed by the sum rule sum(1 - alpha) = 2).

    ``overrides`` replaces computed factors at given vertex indices;
    ``limit_values`` appends caller-supplied limit-vertex factors.
    Collinear vertices (alpha = 1) are returned flagged removable, not
    dropped.  Finite open arcs get factors at interior vertices only.
    """
    v = line.vertices
    omega = line.orientation()
    factors: list[AngleFactor] = []
    n = len(v)
    arc = not line.closed and line.ray_directions is None
    for i in range(n):
        if arc and (i == 0 or i == n - 1):
            continue
        if line.closed:
            din = v[i] - v[i - 1]
            dout = v[(i + 1) % n] - v[i]
        elif arc:
            din = v[i] - v[i - 1]
            dout = v[i + 1] - v[i]
        else:
            if i == 0:
                din = -line.ray_directions[0]
            else:
                din = v[i] - v[i - 1]
            if i == n - 1:
                dout = line.ray_directions[1]
            else:
                dout = v[i + 1] - v[i]
        if abs(din) == 0 or abs(dout) == 0:
            raise DegenerateEdgeError(i)
        turn = float(np.angle(dout / din))
        if abs(abs(turn) - np.pi) < 1e-12:
            raise GeometryError(f"cusp (zero interior angle) at vertex {i}")
        alpha = 1.0 - omega * turn / np.pi
        if overrides and i in overrides:
            alpha = overrides[i]
        if not 0.0 < alpha < 2.0:
            raise GeometryError(
                f"angle factor {alpha:.6g} at vertex {i} outside (0, 2)"
            )
        factors.append(AngleFactor(alpha, i))
    for a in limit_values:
        factors.append(AngleFactor(float(a), LIMIT))
    if line.unbounded:
        finite_sum = sum(1.0 - f.value for f in factors)
        alpha_inf = finite_sum - 1.0
        if not -2.0 < alpha_inf < 0.0:
            raise GeometryError(
                f"angle factor at infinity {alpha_inf:.6g} outside (-2, 0)"
            )
        factors.append(AngleFactor(alpha_inf, INFINITY))
    return factors


def merge_collinear(line: PolygonalLine) -> PolygonalLine:
    """Drop vertices whose angle factor is 1 (within tolerance)."""
    factors = interior_angles(line)
    keep = [
        i
        for i, f in enumerate(factors)
        if f.location not in (INFINITY, LIMIT) and not f.removable
    ]
    if line.closed:
        if len(keep) < 3:
            raise GeometryError("polygon degenerates after merging")
        return PolygonalLine(line.vertices[keep], closed=True)
    if line.ray_directions is None:
        # arc endpoints carry no angle and are always kept
        keep = [0] + keep + [line.n - 1]
        return PolygonalLine(line.vertices[keep])
    if not keep:
        # straight line: keep one anchor vertex
        keep = [0]
    return PolygonalLine(
        line.vertices[keep], ray_directions=line.ray_directions
    )


def deviation(angles: Iterable[AngleFactor]) -> float:
    """max(sup |1 - alpha_n| over finite vertices, |1 - |alpha_inf||)."""
    best = 0.0
    for f in angles:
        if f.at_infinity:
            best = max(best, abs(1.0 - abs(f.value)))
        else:
            best = max(best, abs(1.0 - f.value))
    return best


# -- kernel, classification ---------------------------------------------


def _halfplanes(line: PolygonalLine) -> list[tuple[complex, complex]]:
    """(anchor, direction) pairs; interior half-plane is left of each."""
    if not line.closed and line.ray_directions is None:
        raise GeometryError("an open arc bounds no interior")
    v = line.vertices
    omega = line.orientation()
    hp = []
    if line.unbounded:
        d0, d1 = line.ray_directions
        hp.append((v[0], -d0))
    for i in range(len(v) - 1):
        hp.append((v[i], v[i + 1] - v[i]))
    if line.closed:
        hp.append((v[-1], v[0] - v[-1]))
        if omega < 0:
            hp = [(a, -d) for a, d in hp]
    if line.unbounded:
        hp.append((v[-1], d1))
    return hp


def _clip_halfplane(poly: np.ndarray, anchor: complex, direction: complex,
                    tol: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by the left half-plane."""
    if len(poly) == 0:
        return poly
    d = direction / abs(direction)
    side = _cross_arr(np.full(len(poly), d), poly - anchor)
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        si, sj = side[i], side[j]
        if si >= -tol:
            out.append(poly[i])
        if (si > tol and sj < -tol) or (si < -tol and sj > tol):
            t = si / (si - sj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.array(out, dtype=complex)


def kernel(line: PolygonalLine, *, tol: float | None = None) -> np.ndarray | None:
    """Kernel of the polygon (points seeing the whole boundary), as the
    intersection of the inward edge half-planes clipped to a large box.
    Returns the kernel polygon's vertices, or None when empty."""
    scale = line.scale()
    if tol is None:
        tol = TOL * scale
    c = line.vertices.mean()
    r = 1e3 * scale
    box = c + r * np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))
    poly = box
    for anchor, direction in _halfplanes(line):
        poly = _clip_halfplane(poly, anchor, direction, tol)
        if len(poly) == 0:
            return None
    # reject slivers whose average width is of tolerance size
    area2 = abs(np.sum(_cross_arr(poly, np.roll(poly, -1))))
    perim = float(np.sum(np.abs(np.roll(poly, -1) - poly)))
    if perim == 0.0 or area2 / (2.0 * perim) < 10 * tol:
        return None
    return poly


def _poly_centroid(poly: np.ndarray) -> complex:
    z = poly
    w = np.roll(z, -1)
    cr = _cross_arr(z, w)
    a = cr.sum() / 2.0
    if abs(a) < 1e-300:
        return complex(z.mean())
    c = np.sum((z + w) * cr) / (6.0 * a)
    return complex(c)


@dataclass(frozen=True)
class Classification:
    kind: str  # convex | concave | starlike | generic
    kernel_point: complex | None = None


def classify(line: PolygonalLine) -> Classification:
    """Shape class: convex, concave (complement of an unbounded convex
    polygon), starlike (nonempty kernel, a kernel point returned), or
    generic."""
    if not line.closed and line.ray_directions is None:
        raise GeometryError("an open arc bounds no interior to classify")
    angles = [
        f for f in interior_angles(line) if isinstance(f.location, int)
    ]
    values = np.array([f.value for f in angles])
    if line.closed:
        if np.all(values <= 1.0 + ANGLE_TOL):
            ker = kernel(line)
            pt = _poly_centroid(ker) if ker is not None else None
            return Classification("convex", pt)
    else:
        # a simple left-turning boundary encloses a convex domain
        if np.all(values <= 1.0 + ANGLE_TOL):
            ker = kernel(line)
            pt = _poly_centroid(ker) if ker is not None else None
            return Classification("convex", pt)
        if np.all(values >= 1.0 - ANGLE_TOL):
            rev = line.reversed()
            rv = np.array(
                [f.value for f in interior_angles(rev)
                 if isinstance(f.location, int)]
            )
            if np.all(rv <= 1.0 + ANGLE_TOL):
                return Classification("concave", None)
    ker = kernel(line)
    if ker is not None:
        return Classification("starlike", _poly_centroid(ker))
    return Classification("generic", None)


def point_in_kernel(line: PolygonalLine, p: complex,
                    *, tol: float | None = None) -> bool:
    """True if p lies in the closed kernel of the polygon."""
    scale = line.scale()
    if tol is None:
        tol = TOL * scale
    p = complex(p)
    for anchor, direction in _halfplanes(line):
        d = direction / abs(direction)
        if _cross(d, p - anchor) < -tol:
            return False
    return True


# -- rhombus construction (bound term at a vertex) -----------------------


@dataclass(frozen=True)
class RhombusConstruction:
    """Rhombus inscribed in a polygon angle: equal angles at the vertex A
    and the opposite point T on the bisector; the adjoint angle factors
    at the two side intersections are independent of t."""

    vertex_index: int
    t: float
    vertices: tuple[complex, complex, complex, complex]  # A, B1, T, B2
    adjoint_factors: tuple[float, float]
    reading: str


def _wedge_directions(line: PolygonalLine, i: int):
    """Unit vectors along the two angle sides at vertex i, plus the
    interior angle factor and orientation sign."""
    v = line.vertices
    n = len(v)
    omega = line.orientation()
    if line.closed:
        u_prev = v[(i - 1) % n] - v[i]
        u_next = v[(i + 1) % n] - v[i]
    elif line.ray_directions is None:
        if i == 0 or i == n - 1:
            raise GeometryError("arc endpoints have no interior wedge")
        u_prev = v[i - 1] - v[i]
        u_next = v[i + 1] - v[i]
    else:
        u_prev = line.ray_directions[0] if i == 0 else v[i - 1] - v[i]
        u_next = line.ray_directions[1] if i == n - 1 else v[i + 1] - v[i]
    u1 = u_prev / abs(u_prev)
    u2 = u_next / abs(u_next)
    alpha = interior_angles(line)[i].value
    return u1, u2, alpha, omega


def rhombus_at_vertex(
    line: PolygonalLine,
    vertex_index: int,
    t: float,
    reading: str = "default",
) -> RhombusConstruction:
    """Construct the rhombus with equal angles at vertex A and at the
    point T a distance t along the interior bisector; its other two
    vertices lie on the angle's sides.

    ``reading`` picks the adjoint-angle convention: "default" measures
    between the outgoing side continuation and the outgoing rhombus ray
    (factor 1 - alpha); "supplementary" takes the supplement (alpha).
    """
    if t <= 0:
        raise GeometryError("rhombus parameter t must be positive")
    if reading not in ("default", "supplementary"):
        raise GeometryError(f"unknown adjoint reading {reading!r}")
    u1, u2, alpha, omega = _wedge_directions(line, vertex_index)
    if alpha >= 1.0:
        raise GeometryError(
            "rhombus construction requires an angle opening below pi"
        )
    a_pt = complex(line.vertices[vertex_index])
    s = t / (2.0 * np.cos(np.pi * alpha / 2.0))
    b1 = a_pt + s * u1
    b2 = a_pt + s * u2
    t_pt = a_pt + s * (u1 + u2)
    adj = 1.0 - alpha if reading == "default" else alpha
    return RhombusConstruction(
        vertex_index=vertex_index,
        t=t,
        vertices=(a_pt, b1, t_pt, b2),
        adjoint_factors=(adj, adj),
        reading=reading,
    )


# -- visibility and distances -------------------------------------------


def ray_hits_boundary(line: PolygonalLine, origin: complex,
                      direction: complex, *, skip_near: float = 0.0) -> bool:
    """True if the open ray origin + s*direction (s > skip_near) meets
    any edge or boundary ray of the line."""
    scale = line.scale()
    tol = TOL * scale
    span = 1e6 * scale
    d = direction / abs(direction)
    p = complex(origin) + skip_near * d
    for q, r, _ in _segments_of(line, span):
        if _pair_intersects(p, d * span, q, r, tol):
            return True
    return False


def ray_visible(line: PolygonalLine, vertex_index: int,
                direction: complex) -> bool:
    """Best-effort test that the ray from a vertex toward infinity in the
    given direction stays inside the polygon: the direction must enter
    the interior wedge at the vertex and the ray must not re-cross the
    boundary."""
    u1, u2, alpha, omega = _wedge_directions(line, vertex_index)
    d = complex(direction)
    d = d / abs(d)
    phi = omega * np.angle(d / u2)
    if phi < 0:
        phi += 2 * np.pi
    margin = 1e-9
    if not (margin < phi < np.pi * alpha - margin):
        return False
    v = complex(line.vertices[vertex_index])
    step = 1e-7 * line.scale()
    return not ray_hits_boundary(line, v, d, skip_near=step)


def visible_vertices(line: PolygonalLine,
                     extra_directions: Sequence[complex] = ()) -> list[int]:
    """Vertices from which some candidate ray (declared ray directions,
    the interior bisector and slight tilts of it, plus any extras)
    reaches infinity inside the polygon.

    The tilted candidates matter for self-similar boundaries, where the
    exact bisector can graze a far corner that is collinear with the
    vertex by construction."""
    out = []
    arc = not line.closed and line.ray_directions is None
    for i in range(line.n):
        if arc and (i == 0 or i == line.n - 1):
            continue
        u1, u2, alpha, omega = _wedge_directions(line, i)
        bisector = u2 * np.exp(1j * omega * np.pi * alpha / 2.0)
        candidates = [bisector]
        for tilt in (0.25, 0.7):
            candidates.append(bisector * np.exp(1j * tilt))
            candidates.append(bisector * np.exp(-1j * tilt))
        if line.unbounded:
            candidates.extend(line.ray_directions)
        candidates.extend(extra_directions)
        if any(ray_visible(line, i, d) for d in candidates):
            out.append(i)
    return out


def point_segments_distance(points: np.ndarray, starts: np.ndarray,
                            ends: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest of the given segments.
    Vectorized over both arguments (O(len(points)*len(segments)))."""
    p = np.asarray(points, dtype=complex).reshape(-1, 1)
    a = np.asarray(starts, dtype=complex).reshape(1, -1)
    b = np.asarray(ends, dtype=complex).reshape(1, -1)
    ab = b - a
    denom = np.maximum(np.abs(ab) ** 2, 1e-300)
    t = ((p - a).real * ab.real + (p - a).imag * ab.imag) / denom
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * ab
    return np.min(np.abs(p - proj), axis=1)


def distance_to_line(line: PolygonalLine, points) -> np.ndarray:
    """Distance from each point to the polygonal line (rays clipped far
    beyond the query points)."""
    pts = _as_complex_array(points)
    span = 1e6 * max(line.scale(), np.abs(pts).max() + 1.0)
    segs = _segments_of(line, span)
    starts = np.array([s[0] for s in segs])
    ends = np.array([s[0] + s[1] for s in segs])
    return point_segments_distance(pts, starts, ends)
