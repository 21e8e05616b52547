"""Reflection bounds for analytic arcs.

An arc is described by an analytic map g (polynomial coefficients) and
a Mobius change of variable gamma identifying the reference segment
[-1, 1] with the arc's own parameter domain; the composed map
f = g o gamma traces the arc.  The bound comes from the decay rate of
the bivariate Chebyshev coefficients of the logarithmic difference
quotient F(x, xi) = log((f(x) - f(xi)) / (x - xi)): the faster the
decay, the closer the arc is to a straight or circular one, and the
smaller its reflection coefficient can be certified to be.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.fft import dct

# Number of sample points used to vet injectivity of the composed map.
INJECTIVITY_SAMPLES = 2000


class ArcError(ValueError):
    pass


@dataclass(frozen=True)
class Mobius:
    """Fractional linear map z -> (a z + b) / (c z + d)."""

    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 1.0

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if abs(self.det) <= 1e-15 * max(scale * scale, 1.0):
            raise ArcError("degenerate change of variable (zero determinant)")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.det / (self.c * z + self.d) ** 2


def _poly_divided_difference(coeffs, u, v):
    """(p(u) - p(v)) / (u - v) without the cancellation, via the
    homogeneous sums h_k(u, v) = sum_{j<k} u^j v^(k-1-j); on the
    diagonal this is exactly p'(u)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    h = np.zeros(np.broadcast(u, v).shape, dtype=complex)
    vk = np.ones_like(h)
    out = np.zeros_like(h)
    for k in range(1, len(coeffs)):
        h = u * h + vk
        vk = vk * v
        out = out + coeffs[k] * h
    return out


@dataclass(frozen=True, eq=False)
class ArcSpec:
    """Analytic arc data: polynomial coefficients of g (ascending) and
    the Mobius change of variable onto the arc's parameter domain.

    Construction samples the composed map on [-1, 1] and rejects
    parameterizations that repeat a value or have a critical point.
    """

    g_coefficients: np.ndarray
    gamma: Mobius = field(default_factory=Mobius)

    def __post_init__(self):
        coeffs = np.asarray(self.g_coefficients, dtype=complex).ravel()
        object.__setattr__(self, "g_coefficients", coeffs)
        if coeffs.size == 0 or not np.all(np.isfinite(coeffs.view(float))):
            raise ArcError("g needs at least one finite coefficient")
        if np.abs(coeffs[1:]).max(initial=0.0) == 0.0:
            raise ArcError("g is constant; a constant map traces no arc")
        gm = self.gamma
        if abs(gm.c) > 0.0:
            pole = -gm.d / gm.c
            if abs(pole.imag) <= 1e-9 and abs(pole.real) <= 1.0 + 1e-9:
                raise ArcError("the change of variable has a pole on the segment")
        xs = np.linspace(-1.0, 1.0, INJECTIVITY_SAMPLES)
        u = gm.apply(xs)
        values = P.polyval(u, coeffs)
        deriv = P.polyval(u, P.polyder(coeffs)) * gm.derivative(xs)
        dscale = np.abs(deriv).max()
        if dscale == 0.0 or np.abs(deriv).min() <= 1e-9 * dscale:
            raise ArcError(
                "the composed map has a critical point on the segment"
            )
        fscale = max(float(np.abs(values).max()), 1.0)
        tol = 1e-9 * fscale
        chunk = 200
        for s in range(0, len(values), chunk):
            block = np.abs(values[s : s + chunk, None] - values[None, :])
            block[np.arange(block.shape[0]), s + np.arange(block.shape[0])] = np.inf
            if block.min() <= tol:
                raise ArcError(
                    "the composed map repeats a value on the segment; "
                    "an arc parameterization must be injective"
                )

    def compose(self, x):
        """f(x) = g(gamma(x))."""
        return P.polyval(self.gamma.apply(x), self.g_coefficients)


def _quotient(spec: ArcSpec, x, xi):
    """Difference quotient (f(x) - f(xi)) / (x - xi), diagonal-safe."""
    gm = spec.gamma
    x = np.asarray(x, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    dd = _poly_divided_difference(spec.g_coefficients, gm.apply(x), gm.apply(xi))
    return dd * gm.det / ((gm.c * x + gm.d) * (gm.c * xi + gm.d))


def _leg_phase(spec, x_path, xi_path, start_phase):
    """Continue arg of the quotient along a straight parameter path.

    Returns the endpoint quotient and its unwrapped phase; with
    ``start_phase`` None the phase starts at the principal argument of
    the first quotient on the path.
    """
    for ns in (257, 2049, 16385):
        xs = np.linspace(x_path[0], x_path[1], ns)
        ss = np.linspace(xi_path[0], xi_path[1], ns)
        q = _quotient(spec, xs, ss)
        mags = np.abs(q)
        if mags.min() <= 1e-14 * mags.max():
            raise ArcError(
                "difference quotient vanishes; the arc parameterization "
                "is not injective"
            )
        phases = np.unwrap(np.angle(q))
        if ns > 1 and np.abs(np.diff(phases)).max() >= 1.0:
            continue
        if start_phase is not None:
            phases = phases + (start_phase - phases[0])
        return q[-1], float(phases[-1])
    raise ArcError("phase continuation did not stabilize")


def kernel_F(spec: ArcSpec, x: float, xi: float) -> complex:
    """log((f(x) - f(xi)) / (x - xi)) with the branch continued from the
    diagonal, where its value is log f'(x).

    The continuation runs along the diagonal from 0 to (x, x) and then
    parallel to the second axis, so the result is single-valued and
    symmetric in its two arguments.
    """
    x = float(x)
    xi = float(xi)
    if not (-1.0 <= x <= 1.0 and -1.0 <= xi <= 1.0):
        raise ArcError("kernel arguments must lie in [-1, 1]")
    _, phase = _leg_phase(spec, (0.0, x), (0.0, x), None)
    q_end, phase = _leg_phase(spec, (x, x), (x, xi), phase)
    return complex(math.log(abs(q_end)), phase)


def green_segment(z):
    """Green's function of the segment [-1, 1] with pole at infinity:
    log|z + sqrt(z - 1) sqrt(z + 1)|, zero on the segment itself."""
    z = np.asarray(z, dtype=complex)
    h = z + np.sqrt(z - 1.0) * np.sqrt(z + 1.0)
    out = np.log(np.abs(h))
    return float(out) if out.ndim == 0 else out


def bernstein_walsh_region(z1, z2, R) -> bool:
    """Membership of (z1, z2) in the open region where both coordinates
    stay below the level log R of the segment Green's function."""
    R = float(R)
    if R <= 1.0:
        raise ArcError("the region parameter must exceed 1")
    level = max(green_segment(complex(z1)), green_segment(complex(z2)))
    return bool(level < math.log(R))


@dataclass(frozen=True, eq=False)
class DecayEstimate:
    """Chebyshev-decay data for a kernel: degrees m, near-best error
    proxies e_m, the fitted rate r, and the fit's RMS residual."""

    degrees: np.ndarray
    proxies: np.ndarray
    r: float
    fit_quality: float

    def __post_init__(self):
        degrees = np.asarray(self.degrees, dtype=int)
        proxies = np.asarray(self.proxies, dtype=float)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "proxies", proxies)
        if degrees.shape != proxies.shape:
            raise ArcError("degrees and proxies must align")
        if not 0.0 <= self.r < 1.0:
            raise ArcError(f"decay rate {self.r} outside [0, 1)")


def _kernel_grid(spec: ArcSpec, nodes: np.ndarray) -> np.ndarray:
    """Kernel values on the tensor grid, phase-continued row by row
    away from the diagonal."""
    n = len(nodes)
    gm = spec.gamma
    u = gm.apply(nodes)
    dd = _poly_divided_difference(spec.g_coefficients, u[:, None], u[None, :])
    den = gm.c * nodes + gm.d
    q = dd * gm.det / (den[:, None] * den[None, :])
    mags = np.abs(q)
    if mags.min() <= 1e-14 * mags.max():
        raise ArcError(
            "difference quotient vanishes; the arc parameterization "
            "is not injective"
        )
    ang = np.angle(q)
    diag = np.unwrap(np.diagonal(ang))
    phases = np.empty_like(ang)
    for i in range(n):
        right = np.unwrap(ang[i, i:])
        phases[i, i:] = right + (diag[i] - right[0])
        left = np.unwrap(ang[i, i::-1])
        phases[i, : i + 1] = (left + (diag[i] - left[0]))[::-1]
    return np.log(mags) + 1j * phases


def _chebyshev_coefficients(values: np.ndarray, n: int) -> np.ndarray:
    """Bivariate Chebyshev coefficients from values on the n x n
    Chebyshev-Gauss grid, one DCT-II per axis."""

    def both_axes(mat):
        return dct(dct(mat, type=2, axis=0), type=2, axis=1)

    coef = (both_axes(values.real) + 1j * both_axes(values.imag)) / (n * n)
    coef[0, :] *= 0.5
    coef[:, 0] *= 0.5
    return coef


def estimate_r(spec: ArcSpec, max_degree: int) -> DecayEstimate:
    """Decay rate of the kernel's bivariate Chebyshev coefficients.

    e_m is the largest coefficient magnitude of total degree m, a
    near-best stand-in for the best approximation error; the rate r is
    the slope of log e_m over the informative upper half of the
    degrees, skipping entries at the rounding floor.
    """
    if int(max_degree) < 16:
        raise ArcError("decay estimation needs max_degree >= 16")
    n = int(max_degree) + 1
    nodes = np.cos((2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n))
    coef = _chebyshev_coefficients(_kernel_grid(spec, nodes), n)
    mags = np.abs(coef)
    by_total = np.zeros(2 * n - 1)
    idx = np.arange(n)
    np.maximum.at(by_total, (idx[:, None] + idx[None, :]).ravel(), mags.ravel())
    degrees = np.arange(int(max_degree) + 1)
    proxies = by_total[: int(max_degree) + 1].copy()
    # the constant coefficient only carries affine normalization
    peak = proxies[1:].max(initial=0.0)
    if peak <= 1e-14 * max(1.0, mags[0, 0]):
        return DecayEstimate(degrees, proxies, 0.0, 0.0)
    floor = peak * 1e-12
    informative = np.nonzero(proxies > floor)[0]
    informative = informative[informative >= 1]
    if len(informative) < 3:
        return DecayEstimate(degrees, proxies, 0.0, 0.0)
    cut = (informative[-1] + 1) // 2
    window = informative[informative >= cut]
    if len(window) < 3:
        window = informative[-3:]
    logs = np.log(proxies[window])
    slope, intercept = np.polyfit(window, logs, 1)
    residual = logs - (slope * window + intercept)
    quality = float(np.sqrt(np.mean(residual**2)))
    rate = float(np.exp(slope))
    if rate >= 1.0:
        raise ArcError(
            "no geometric decay detected; the kernel is not analytic "
            "on the closed square"
        )
    return DecayEstimate(degrees, proxies, rate, quality)


@dataclass(frozen=True)
class EllipseParams:
    """Semiaxes of an ellipse with foci at -1 and 1."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > self.b >= 0.0:
            raise ArcError("semiaxes must satisfy a > b >= 0")
        if abs(self.a * self.a - self.b * self.b - 1.0) > 1e-12:
            raise ArcError("semiaxes must satisfy a^2 - b^2 = 1")


def reflection_bound(r: float):
    """Reflection coefficient bound for an arc with decay rate r.

    The confocal ellipse with a + b = 1/r forces a = (1/r + r)/2 and
    b = (1/r - r)/2; the bound is 1/(a^2 + b^2) = 2/(r^2 + 1/r^2).
    Returns (ellipse, bound); r = 0 has no ellipse and bound 0.
    """
    r = float(r)
    if not 0.0 <= r < 1.0:
        raise ArcError("decay rate must lie in [0, 1)")
    if r == 0.0:
        return None, 0.0
    a = 0.5 * (1.0 / r + r)
    b = 0.5 * (1.0 / r - r)
    return EllipseParams(a, b), 2.0 / (r * r + 1.0 / (r * r))


# -- JSON wire format ------------------------------------------------------


def _number_to_json(z: complex):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]


def _number_from_json(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ArcError("complex entries must be [re, im] pairs")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def arc_spec_to_json(spec: ArcSpec) -> dict:
    gm = spec.gamma
    return {
        "g_coefficients": [[z.real, z.imag] for z in spec.g_coefficients],
        "gamma": [
            [_number_to_json(gm.a), _number_to_json(gm.b)],
            [_number_to_json(gm.c), _number_to_json(gm.d)],
        ],
    }


def arc_spec_from_json(obj: dict) -> ArcSpec:
    try:
        coeffs = [_number_from_json(c) for c in obj["g_coefficients"]]
    except (KeyError, TypeError) as exc:
        raise ArcError("arc JSON needs a g_coefficients list") from exc
    gamma = Mobius()
    if "gamma" in obj:
        rows = obj["gamma"]
        if len(rows) != 2 or len(rows[0]) != 2 or len(rows[1]) != 2:
            raise ArcError("gamma must be a 2 x 2 matrix")
        gamma = Mobius(
            _number_from_json(rows[0][0]),
            _number_from_json(rows[0][1]),
            _number_from_json(rows[1][0]),
            _number_from_json(rows[1][1]),
        )
    return ArcSpec(np.array(coeffs, dtype=complex), gamma)
