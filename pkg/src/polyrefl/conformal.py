"""Schwarz-Christoffel disk maps and the power-series engine around them.

A polygon's Riemann map from the unit disk has derivative
C * prod_k (1 - z/z_k)^(alpha_k - 1) with prevertices z_k on the circle;
for unbounded polygons the prevertex of the vertex at infinity carries
exponent alpha_inf - 1.  This module solves the prevertex parameter
problem, evaluates the map by singularity-absorbing quadrature, expands
it into exact truncated Taylor series, recenters, inverts to the
exterior normalization, and applies the radial homotopy f(tz)/t.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import least_squares
from scipy.special import roots_jacobi

from .geometry import PolygonalLine, interior_angles, validate_simple

DEFAULT_TRUNCATION = 128
MAX_TRUNCATION = 4096
QUAD_NODES = 24
SOLVER_BUDGET = 200
RESIDUAL_TOL = 1e-6

INF_POINT = complex(np.inf, np.inf)


class ConformalError(ValueError):
    pass


class SolverError(ConformalError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


# -- series types and algebra --------------------------------------------


@dataclass(frozen=True, eq=False)
class TaylorSeries:
    """Normalized power series f(z) = z + a2 z^2 + ... (a1 = 1).

    ``coefficients[i]`` holds a_{i+1}.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", c)
        if len(c) < 3:
            raise ConformalError("series needs at least 3 coefficients")
        if abs(c[0] - 1.0) > 1e-12:
            raise ConformalError("series is not normalized (a1 != 1)")
        if not np.all(np.isfinite(c.view(float))):
            raise ConformalError("non-finite series coefficients")

    @property
    def truncation(self) -> int:
        return len(self.coefficients)

    def a(self, n: int) -> complex:
        return complex(self.coefficients[n - 1])

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        return z * np.polynomial.polynomial.polyval(z, self.coefficients)

    def to_json(self) -> dict:
        return {
            "kind": "taylor-S",
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
        }


@dataclass(frozen=True, eq=False)
class SigmaSeries:
    """Exterior normalization F(z) = z + b0 + b1/z + ...

    ``coefficients[j]`` holds b_j; the leading z-coefficient is fixed
    at 1 and not stored.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", c)
        if len(c) < 2:
            raise ConformalError("series needs at least b0 and b1")
        if not np.all(np.isfinite(c.view(float))):
            raise ConformalError("non-finite series coefficients")

    @property
    def truncation(self) -> int:
        return len(self.coefficients)

    def b(self, j: int) -> complex:
        return complex(self.coefficients[j])

    def to_json(self) -> dict:
        return {
            "kind": "sigma",
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
        }


def series_from_json(obj: dict):
    coeffs = np.array([complex(re, im) for re, im in obj["coefficients"]])
    kind = obj.get("kind")
    if kind == "taylor-S":
        return TaylorSeries(coeffs)
    if kind == "sigma":
        return SigmaSeries(coeffs)
    raise ConformalError(f"unknown series kind {kind!r}")


def _binomial_series(beta: float, w: complex, M: int) -> np.ndarray:
    """Coefficients of (1 - w z)^beta up to z^M."""
    c = np.zeros(M + 1, dtype=complex)
    c[0] = 1.0
    for j in range(1, M + 1):
        c[j] = c[j - 1] * (beta - j + 1) / j * (-w)
    return c


def _product_series(prevertices, betas, M: int) -> np.ndarray:
    """Coefficients of prod_k (1 - conj(z_k) z)^(beta_k) up to z^M."""
    c = np.zeros(M + 1, dtype=complex)
    c[0] = 1.0
    for zk, bk in zip(prevertices, betas):
        c = np.convolve(c, _binomial_series(bk, np.conj(zk), M))[: M + 1]
    return c


def _reciprocal(c: np.ndarray) -> np.ndarray:
    """Truncated power-series reciprocal (c[0] must be nonzero)."""
    r = np.zeros_like(c)
    r[0] = 1.0 / c[0]
    for k in range(1, len(c)):
        r[k] = -r[0] * np.dot(c[1 : k + 1], r[k - 1 :: -1][:k])
    return r


def invert_to_sigma(series):
    """Pass to the inversion F(z) = 1/f(1/z) and back.

    A Taylor series a_1..a_N maps to the sigma coefficients b_0..b_{N-2}
    and vice versa; the pair of lengths (N, N-1) carries the same N-1
    free complex parameters, and the roundtrip is exact.
    """
    if isinstance(series, TaylorSeries):
        g = series.coefficients  # g_k = a_{k+1}, g_0 = 1
        h = _reciprocal(g)
        return SigmaSeries(h[1:])
    if isinstance(series, SigmaSeries):
        g = np.concatenate([[1.0 + 0j], series.coefficients])
        h = _reciprocal(g)
        return TaylorSeries(h)
    raise ConformalError("expected a TaylorSeries or SigmaSeries")


def homotopy(series: TaylorSeries, t: float) -> TaylorSeries:
    """Radial homotopy f_t(z) = f(tz)/t, i.e. a_n -> a_n t^(n-1)."""
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise ConformalError("homotopy parameter must lie in (0, 1]")
    if not isinstance(series, TaylorSeries):
        raise ConformalError("homotopy acts on normalized Taylor series")
    powers = t ** np.arange(len(series.coefficients))
    return TaylorSeries(series.coefficients * powers)


def schwarzian_at_zero(series: TaylorSeries) -> complex:
    """S_f(0) = 6(a3 - a2^2); zero signals that recentering is needed
    before normalization arguments that divide by it."""
    return 6.0 * (series.a(3) - series.a(2) ** 2)


# -- the map type ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SCMap:
    """Solved disk map f = A + C * integral of the prevertex product.

    ``prevertices`` are ordered strictly by argument in (0, 2pi];
    ``angle_factors`` match them (including the factor at infinity at
    ``infinite_index`` for unbounded targets); ``vertex_images`` hold
    the exact polygon vertices so evaluation at a prevertex can return
    the corner without quadrature.
    """

    prevertices: np.ndarray
    angle_factors: np.ndarray
    multiplier: complex
    translation: complex
    side_residuals: float
    infinite_index: int | None = None
    vertex_images: np.ndarray | None = None

    def __post_init__(self):
        z = np.asarray(self.prevertices, dtype=complex)
        a = np.asarray(self.angle_factors, dtype=float)
        object.__setattr__(self, "prevertices", z)
        object.__setattr__(self, "angle_factors", a)
        if len(z) != len(a) or len(z) < 2:
            raise ConformalError("prevertex and angle lists must match")
        if np.max(np.abs(np.abs(z) - 1.0)) > 1e-12:
            raise ConformalError("prevertices must lie on the unit circle")
        ang = np.angle(z)
        ang[ang <= 1e-15] += 2 * np.pi
        if np.any(np.diff(ang) <= 0):
            raise ConformalError("prevertices must be ordered by argument")
        if abs(np.sum(a - 1.0) + 2.0) > 1e-12:
            raise ConformalError("angle factors must satisfy sum(a-1) = -2")

    @property
    def betas(self) -> np.ndarray:
        return self.angle_factors - 1.0

    @property
    def unbounded(self) -> bool:
        return self.infinite_index is not None


# -- quadrature -----------------------------------------------------------


@lru_cache(maxsize=None)
def _gl_rule():
    return leggauss(QUAD_NODES)


@lru_cache(maxsize=512)
def _gj_rule(beta: float):
    return roots_jacobi(QUAD_NODES, 0.0, beta)


class _Integrator:
    """Compound quadrature of prod_k (1 - conj(z_k) zeta)^(beta_k) along
    straight segments in the closed disk; endpoint singularities are
    absorbed by Gauss-Jacobi weights, interior panels sized by the
    distance to the nearest prevertex."""

    def __init__(self, prevertices, betas):
        self.z = np.asarray(prevertices, dtype=complex)
        self.zc = np.conj(self.z)
        self.b = np.asarray(betas, dtype=float)

    def _values(self, pts, skip=None):
        w = 1.0 - np.outer(pts, self.zc)
        if skip is not None:
            w[:, skip] = 1.0
        return np.prod(np.power(w, self.b[None, :]), axis=1)

    def _jacobi_piece(self, za, zb, sing):
        x, w = _gj_rule(float(self.b[sing]))
        delta = zb - za
        pts = za + (x + 1.0) * delta / 2.0
        rest = self._values(pts, skip=sing)
        front = np.power(-delta * self.zc[sing] / 2.0, self.b[sing])
        return (delta / 2.0) * front * np.dot(w, rest)

    def _legendre_walk(self, za, zb):
        x, w = _gl_rule()
        total = 0.0 + 0.0j
        length = abs(zb - za)
        if length == 0.0:
            return total
        u = (zb - za) / length
        done = 0.0
        for _ in range(20000):
            c = za + done * u
            rem = length - done
            if rem <= 1e-15 * max(length, 1.0):
                return total
            d = np.abs(self.z - c).min()
            h = min(rem, max(d / 2.0, rem * 1e-12))
            pts = c + (x + 1.0) * (h * u) / 2.0
            total += (h * u / 2.0) * np.dot(w, self._values(pts))
            done += h
        raise ConformalError("quadrature walk failed to terminate")

    def segment(self, za, zb, sing_a=None, sing_b=None):
        """Integral from za to zb; sing_a/sing_b name the prevertex index
        sitting exactly at the respective endpoint, if any."""
        za, zb = complex(za), complex(zb)
        if za == zb:
            return 0.0 + 0.0j
        if sing_a is not None and sing_b is not None:
            mid = 0.5 * (za + zb)
            return self.segment(za, mid, sing_a, None) + self.segment(
                mid, zb, None, sing_b
            )
        if sing_b is not None:
            return -self.segment(zb, za, sing_b, None)
        if sing_a is not None:
            others = np.abs(self.z - za)
            others[sing_a] = np.inf
            d = others.min()
            length = abs(zb - za)
            u = (zb - za) / length
            h = min(length, d / 2.0)
            val = self._jacobi_piece(za, za + h * u, sing_a)
            if length - h > 1e-15 * length:
                val += self._legendre_walk(za + h * u, zb)
            return val
        return self._legendre_walk(za, zb)


def _integrator(m: SCMap) -> _Integrator:
    return _Integrator(m.prevertices, m.betas)


# -- parameter problem ----------------------------------------------------


def _angles_from_gaps(x: np.ndarray, P: int) -> np.ndarray:
    """Prevertex arguments in (0, 2pi] with the last three pinned and the
    first P-3 free through positive gap ratios (x = log gaps)."""
    if P == 2:
        return np.array([np.pi, 2 * np.pi])
    base = 2 * np.pi * (P - 2) / P
    gaps = np.concatenate([np.exp(x), [1.0]])
    cum = np.cumsum(gaps) / np.sum(gaps) * base
    tail = np.array([base, 2 * np.pi * (P - 1) / P, 2 * np.pi])
    return np.concatenate([cum[: P - 3], tail])


def _side_pairs(P: int, infinite_index):
    if infinite_index is None:
        return [(k, (k + 1) % P) for k in range(P)]
    return [(k, k + 1) for k in range(P - 2)]


def _chord_lengths(integ: _Integrator, prevs, pairs):
    out = np.empty(len(pairs))
    for i, (a, b) in enumerate(pairs):
        out[i] = abs(integ.segment(prevs[a], prevs[b], a, b))
    return out


def sc_solve(line: PolygonalLine, angles=None) -> SCMap:
    """Solve the prevertex parameter problem for a simple polygon.

    Closed polygons are normalized to counterclockwise traversal, so
    the map's vertex order may be the reverse of the input's.  For
    unbounded polygons the prevertex of the vertex at infinity is the
    last entry, pinned at z = 1.
    """
    if not line.closed and line.ray_directions is None:
        raise ConformalError("open arcs have no interior to map")
    if line.closed and line.orientation() < 0:
        line = line.reversed()
    if not validate_simple(line):
        raise ConformalError("polygon must be simple")
    factors = interior_angles(line) if angles is None else list(angles)
    alphas = np.array([f.value for f in factors])
    verts = line.vertices
    P = len(alphas)
    inf_index = P - 1 if line.unbounded else None
    betas = alphas - 1.0

    pairs = _side_pairs(P, inf_index)
    targets = np.array(
        [abs(verts[(b) % len(verts)] - verts[a]) for a, b in pairs]
    )
    nfree = max(P - 3, 0)

    def residual(x):
        th = _angles_from_gaps(x, P)
        prevs = np.exp(1j * th)
        integ = _Integrator(prevs, betas)
        lengths = _chord_lengths(integ, prevs, pairs)
        logs = np.log(lengths / targets)
        return logs[:-1] - logs[-1]

    x = np.zeros(nfree)
    if nfree > 0 and len(pairs) >= 2:
        sol = least_squares(
            residual,
            x,
            xtol=1e-14,
            ftol=1e-14,
            gtol=1e-15,
            max_nfev=SOLVER_BUDGET * (nfree + 1),
        )
        x = sol.x

    th = _angles_from_gaps(x, P)
    prevs = np.exp(1j * th)
    integ = _Integrator(prevs, betas)

    if len(pairs) >= 1:
        i01 = integ.segment(prevs[pairs[0][0]], prevs[pairs[0][1]],
                            pairs[0][0], pairs[0][1])
        C = (verts[pairs[0][1] % len(verts)] - verts[pairs[0][0]]) / i01
    else:
        # single finite vertex: scale is free, fix the rotation by the
        # outgoing ray direction (the circle arc leaving the finite
        # prevertex counterclockwise maps to it)
        probe = prevs[0] * np.exp(1j * 1e-3)
        step = integ.segment(prevs[0], probe, 0, None)
        C = line.ray_directions[1] / (step / abs(step))
    A = verts[0] - C * integ.segment(0.0, prevs[0], None, 0)

    if len(pairs) >= 1:
        lengths = np.abs(C) * _chord_lengths(integ, prevs, pairs)
        resid = float(np.max(np.abs(lengths - targets) / targets))
    else:
        resid = 0.0
    if not np.isfinite(resid) or resid > RESIDUAL_TOL:
        raise SolverError(
            f"parameter problem did not converge (residual {resid:.3g})",
            residuals=resid,
        )

    images = np.asarray(verts, dtype=complex)
    if line.unbounded:
        images = np.concatenate([images, [INF_POINT]])
    return SCMap(
        prevertices=prevs,
        angle_factors=alphas,
        multiplier=complex(C),
        translation=complex(A),
        side_residuals=resid,
        infinite_index=inf_index,
        vertex_images=images,
    )


def sc_eval(m: SCMap, z, *, snap: bool = True) -> complex:
    """Evaluate the map at a point of the closed disk.

    At a prevertex the stored vertex is returned exactly (pass
    snap=False to force quadrature; the infinite vertex then errors).
    """
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise ConformalError("evaluation point lies outside the closed disk")
    d = np.abs(m.prevertices - z)
    k = int(np.argmin(d))
    if d[k] < 1e-13:
        if snap and m.vertex_images is not None:
            return complex(m.vertex_images[k])
        if k == m.infinite_index:
            raise ConformalError("map diverges at the infinite-vertex prevertex")
        sing = k
    else:
        sing = None
    val = _integrator(m).segment(0.0, z, None, sing)
    return m.translation + m.multiplier * val


def sc_derivative(m: SCMap, z) -> complex:
    """f'(z) = C * prod_k (1 - conj(z_k) z)^(alpha_k - 1)."""
    z = complex(z)
    w = 1.0 - z * np.conj(m.prevertices)
    return m.multiplier * complex(np.prod(np.power(w, m.betas)))


def taylor_coefficients(m: SCMap, N: int = DEFAULT_TRUNCATION) -> TaylorSeries:
    """Exact truncated Taylor series of (f - f(0))/f'(0).

    The prevertex product is expanded by binomial-series convolution and
    integrated termwise; no quadrature enters.
    """
    if N < 3:
        raise ConformalError("truncation must be at least 3")
    if N > MAX_TRUNCATION:
        raise ConformalError(f"truncation beyond stability budget {MAX_TRUNCATION}")
    c = _product_series(m.prevertices, m.betas, N - 1)
    return TaylorSeries(c / np.arange(1, N + 1))


# -- recentering ----------------------------------------------------------


def _preimage(m: SCMap, p: complex) -> complex:
    scale = np.max(np.abs(m.prevertices))  # 1; images may be large
    finite = m.vertex_images
    if finite is not None:
        fv = finite[np.isfinite(finite)]
        if len(fv):
            scale = max(1.0, float(np.max(np.abs(fv))))
    z = 0.0 + 0.0j
    fz = sc_eval(m, z, snap=False)
    for _ in range(80):
        if abs(fz - p) < 1e-13 * scale:
            return z
        step = (p - fz) / sc_derivative(m, z)
        t = 1.0
        for _ in range(60):
            z2 = z + t * step
            if abs(z2) < 1.0 - 1e-12:
                f2 = sc_eval(m, z2, snap=False)
                if abs(f2 - p) < abs(fz - p):
                    z, fz = z2, f2
                    break
            t /= 2.0
        else:
            raise ConformalError(
                "no interior preimage found (is the point inside the polygon?)"
            )
    raise ConformalError("preimage iteration did not converge")


def _centroid(points: np.ndarray) -> complex:
    z = points
    w = np.roll(z, -1)
    cr = z.real * w.imag - z.imag * w.real
    a = cr.sum() / 2.0
    if abs(a) < 1e-300:
        return complex(z.mean())
    return complex(np.sum((z + w) * cr) / (6.0 * a))


def recenter(m: SCMap, p: complex | None = None,
             N: int = DEFAULT_TRUNCATION) -> TaylorSeries:
    """Series of the map recentered at the interior point p.

    The map is precomposed with the disk automorphism sending 0 to the
    preimage of p and renormalized; the prevertex product form is
    preserved, so the series stays exact.  Default p: the polygon's
    centroid (closed targets) or the current center f(0) (unbounded).
    """
    if p is None:
        if m.unbounded:
            p = sc_eval(m, 0.0)
        else:
            p = _centroid(m.vertex_images)
    zc = _preimage(m, complex(p))
    if abs(zc) > 1.0 - 1e-9:
        raise ConformalError("recenter point is on or too near the boundary")
    prevs = (m.prevertices - zc) / (1.0 - np.conj(zc) * m.prevertices)
    prevs = prevs / np.abs(prevs)
    if N < 3 or N > MAX_TRUNCATION:
        raise ConformalError("truncation out of range")
    c = _product_series(prevs, m.betas, N - 1)
    return TaylorSeries(c / np.arange(1, N + 1))
