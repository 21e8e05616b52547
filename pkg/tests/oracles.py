"""Independent reference implementations used only by the test suite.

Each oracle takes a deliberately different route from the library code:
simplicity via shapely's geometry engine, Grunsky coefficients via the
Faber-polynomial recursion instead of the bivariate log, and matrix
norms via full SVD instead of power iteration.
"""

import numpy as np


def shapely_simple(line, ray_span=1e4) -> bool:
    """Simplicity test via shapely; rays clipped to a finite span."""
    from shapely.geometry import LineString

    v = list(line.vertices)
    if line.closed:
        coords = [(z.real, z.imag) for z in v] + [(v[0].real, v[0].imag)]
    else:
        d0, d1 = line.ray_directions
        a = v[0] + ray_span * d0
        b = v[-1] + ray_span * d1
        coords = (
            [(a.real, a.imag)]
            + [(z.real, z.imag) for z in v]
            + [(b.real, b.imag)]
        )
    return LineString(coords).is_simple


def faber_grunsky(b, N, tail=None):
    """Weighted Grunsky block via the Faber-polynomial recursion.

    ``b`` holds the negative-power coefficients of F(w) = w + b0 +
    b1/w + ... with b[0] = b0.  Phi_0 = 1, Phi_1 = w - b0, and
    Phi_{m+1} = (w - b0) Phi_m - sum_{k<=m} b_k Phi_{m-k} - m b_m;
    composing with F leaves w^m plus m * sum_n b_mn w^-n.
    """
    b = np.asarray(b, dtype=complex)
    if tail is None:
        tail = 4 * N + 8
    b0 = b[0] if len(b) else 0.0
    Phi = [np.array([1.0 + 0j]), np.array([-b0, 1.0 + 0j])]
    for m in range(1, N):
        nxt = np.zeros(m + 2, dtype=complex)
        nxt[1:] += Phi[m]
        nxt[: m + 1] -= b0 * Phi[m]
        for k in range(1, m + 1):
            if k < len(b):
                nxt[: m - k + 1] -= b[k] * Phi[m - k]
        if m < len(b):
            nxt[0] -= m * b[m]
        Phi.append(nxt)

    L = tail

    def lmul(u, v):
        full = np.convolve(u, v)
        out = full[L : L + L + N + 1]
        if len(out) < L + N + 1:
            out = np.pad(out, (0, L + N + 1 - len(out)))
        return out

    F = np.zeros(L + N + 1, dtype=complex)
    F[L + 1] = 1.0
    for j, bj in enumerate(b):
        if L - j >= 0:
            F[L - j] += bj
    out = np.zeros((N + 1, N + 1), dtype=complex)
    for m in range(1, N + 1):
        coeffs = Phi[m]
        acc = np.zeros(L + N + 1, dtype=complex)
        acc[L] = coeffs[-1]
        for c in coeffs[-2::-1]:
            acc = lmul(acc, F)
            acc[L] += c
        for n in range(1, N + 1):
            out[m, n] = acc[L - n] / m
    mm = np.arange(1, N + 1)
    return np.sqrt(np.outer(mm, mm)) * out[1:, 1:]


def svd_norm(B) -> float:
    """Largest singular value by full decomposition."""
    return float(np.linalg.svd(np.asarray(B, dtype=complex),
                               compute_uv=False)[0])


def random_convex_polygon(rng, n, radius=1.0):
    """Convex position points: hull of random directions with positive
    radii, returned counterclockwise."""
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, size=n))
        if np.min(np.diff(ang)) < 0.05:
            continue
        r = rng.uniform(0.5, 1.0, size=n) * radius
        pts = r * np.exp(1j * ang)
        # hull of points on distinct rays from the origin may drop some;
        # retry until all survive so the vertex count is exact
        hull = _hull(pts)
        if len(hull) == n:
            return hull


def _hull(pts):
    pts = sorted(pts, key=lambda z: (z.real, z.imag))

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and (
                (out[-1] - out[-2]).conjugate() * (p - out[-2])
            ).imag <= 0:
                out.pop()
            out.append(p)
        return out

    lo = half(pts)
    hi = half(reversed(pts))
    ring = lo[:-1] + hi[:-1]
    return np.array(ring, dtype=complex)


def wedge_map_oracle(z):
    """Closed form for the right-angle wedge: the solved map must agree
    with C * sqrt((1+z)/(1-z)) for a single constant C."""
    z = np.asarray(z, dtype=complex)
    return np.sqrt((1.0 + z) / (1.0 - z))


def wedge_series_oracle(N):
    """Taylor coefficients a_1..a_N of sqrt((1+z)/(1-z)) - 1, via the
    generalized binomial theorem (no shared code with the library)."""
    from scipy.special import binom

    k = np.arange(N + 1)
    plus = binom(0.5, k)                     # (1+z)^(1/2)
    minus = binom(-0.5, k) * (-1.0) ** k     # (1-z)^(-1/2)
    prod = np.convolve(plus, minus)[: N + 1]
    return prod[1:].astype(complex)


def sampled_hausdorff(a, b, samples_per_edge=400):
    """Dense-sampling estimate of the Hausdorff distance between two
    vertex chains.

    Samples one chain densely and measures exact distances to the other
    chain's segments, both ways.  The result is a lower bound on the
    true distance, short of it by at most half the sampling step.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)

    def resample(pts):
        out = [pts[:1]]
        ts = np.linspace(0.0, 1.0, samples_per_edge + 1)[1:]
        for u, v in zip(pts[:-1], pts[1:]):
            out.append(u + ts * (v - u))
        return np.concatenate(out)

    def dist_to_chain(x, pts):
        if len(pts) == 1:
            return np.abs(x - pts[0])
        base = pts[:-1]
        delta = np.diff(pts)
        keep = np.abs(delta) > 0
        base, delta = base[keep], delta[keep]
        if len(base) == 0:
            return np.abs(x - pts[0])
        w = x[:, None] - base[None, :]
        t = (w * np.conj(delta)[None, :]).real / (np.abs(delta) ** 2)[None, :]
        np.clip(t, 0.0, 1.0, out=t)
        return np.abs(w - t * delta[None, :]).min(axis=1)

    d_ab = dist_to_chain(resample(a), b).max()
    d_ba = dist_to_chain(resample(b), a).max()
    return max(float(d_ab), float(d_ba))
