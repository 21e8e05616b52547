"""Grunsky coefficient matrices and their truncated operator norms.

The coefficients b_mn of log((F(x) - F(y))/(x - y)) for an exterior
map F(z) = z + b0 + b1/z + ... are extracted by a bivariate log
recursion; the weighted matrix beta_mn = sqrt(mn) b_mn acting on l^2 is
the object whose norm bounds quasiconformal reflection quality.  Norms
are computed by an antilinear power iteration (the matrix is complex
symmetric, so the norm is max |x^T B x| over unit vectors) with a
certificate vector attached; truncation sweeps certify monotonicity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import SigmaSeries

DEFAULT_REL_TOL = 1e-10


class GrunskyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GrunskyMatrix:
    """Weighted Grunsky block beta_mn = sqrt(mn) b_mn, 1 <= m, n <= N."""

    entries: np.ndarray
    truncation: int

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", e)
        N = self.truncation
        if e.shape != (N, N):
            raise GrunskyError("entries must form an N x N block")
        if not np.all(np.isfinite(e.view(float))):
            raise GrunskyError("non-finite matrix entries")
        scale = max(1.0, float(np.max(np.abs(e))) if N else 1.0)
        if N and np.max(np.abs(e - e.T)) > 1e-12 * scale:
            raise GrunskyError("matrix is not symmetric")

    def to_json(self) -> dict:
        flat = self.entries.reshape(-1)
        return {
            "kind": "grunsky",
            "truncation": self.truncation,
            "entries": [[c.real, c.imag] for c in flat],
        }


def matrix_from_json(obj: dict) -> GrunskyMatrix:
    if obj.get("kind") != "grunsky":
        raise GrunskyError("not a grunsky matrix object")
    N = int(obj["truncation"])
    flat = np.array([complex(re, im) for re, im in obj["entries"]])
    return GrunskyMatrix(flat.reshape(N, N), N)


@dataclass(frozen=True, eq=False)
class GrunskyNormEstimate:
    """Norm value with its provenance: the truncation, the sequence of
    (N_i, value_i) pairs certifying monotone growth, a unit vector x
    with |x^T B x| equal to the value, and the final Cauchy gap of a
    sweep."""

    value: float
    truncation: int
    monotone_certificate: tuple
    certificate_vector: np.ndarray | None = None
    cauchy_gap: float | None = None
    target: float | None = None


def grunsky_coefficients(series: SigmaSeries, N: int) -> GrunskyMatrix:
    """Weighted Grunsky block from an exterior series.

    Requires coefficients b_0..b_{2N-1} (indices through p+q-1 = 2N-1);
    fewer coefficients cannot determine the block and raise.
    """
    if not isinstance(series, SigmaSeries):
        raise GrunskyError("expected a SigmaSeries")
    if N < 1:
        raise GrunskyError("truncation must be at least 1")
    b = series.coefficients
    if len(b) < 2 * N:
        raise GrunskyError(
            f"need at least {2 * N} sigma coefficients for truncation {N}, "
            f"got {len(b)}"
        )
    # G(x, y) = 1 - sum_{p,q >= 1} b_{p+q-1} x^p y^q; rows are y-series
    G = np.zeros((N + 1, N + 1), dtype=complex)
    G[0, 0] = 1.0
    for p in range(1, N + 1):
        G[p, 1:] = -b[p : p + N]
    # (d/dx log G) = sum H_p x^p with G_0 = 1, so G * sum(H) = dG/dx
    H = np.zeros((N, N + 1), dtype=complex)
    for p in range(N):
        acc = (p + 1) * G[p + 1].copy()
        for i in range(p):
            acc -= np.convolve(H[i], G[p - i])[: N + 1]
        H[p] = acc
    # log G = -sum_{m,n} b_mn x^m y^n, so b_mn = -(H_{m-1}/m)[n]
    bmn = np.empty((N, N), dtype=complex)
    for m in range(1, N + 1):
        bmn[m - 1] = -H[m - 1][1:] / m
    w = np.sqrt(np.arange(1, N + 1, dtype=float))
    return GrunskyMatrix(np.outer(w, w) * bmn, N)


def _takagi_polish(B, v, steps=40):
    """Align phases within the top singular subspace.

    A right singular vector of a symmetric B satisfies B v =
    sigma conj(v) up to phase, so w = conj(B v) stays in the singular
    subspace of v; the averaged update v <- normalize(w + sigma v)
    settles on a vector with B v = sigma conj(v) in a step or two,
    including when the subspace is degenerate."""
    for _ in range(steps):
        w = np.conj(B @ v)
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            break
        if np.linalg.norm(w - sigma * v) <= 1e-13 * sigma:
            break
        vn = w + sigma * v
        nv = float(np.linalg.norm(vn))
        if nv < 1e-12 * sigma:
            v = v * 1j  # antipodal lock; quarter turn and retry
            continue
        v = vn / nv
    return v


def grunsky_norm(
    matrix: GrunskyMatrix,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
    budget: int | None = None,
    seed: int = 0,
    target: float | None = None,
) -> GrunskyNormEstimate:
    """Largest singular value via power iteration on conj(B) B.

    The conjugate product is Hermitian positive semidefinite with
    eigenvalues equal to squared singular values; its Rayleigh quotient
    is iterated to relative tolerance ``rel_tol`` from a seeded random
    start.  The converged vector is phase-aligned into a unit x with
    |x^T B x| = sigma, the certified value reported (for a symmetric
    matrix the norm is the sup of |x^T B x| over unit x).
    A stalled start is restarted from a perturbed vector; exhausting
    the overall budget of 10 N iterations raises.
    """
    B = matrix.entries
    N = matrix.truncation
    if budget is None:
        budget = max(10 * N, 100)
    if N == 0 or np.max(np.abs(B)) == 0.0:
        e1 = np.zeros(max(N, 1), dtype=complex)
        e1[0] = 1.0
        return GrunskyNormEstimate(0.0, N, ((N, 0.0),), e1, None, target)

    A = np.conj(B) @ B
    rng = np.random.default_rng(seed)
    used = 0
    while used < budget:
        v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        v /= np.linalg.norm(v)
        rho_prev = -1.0
        while used < budget:
            used += 1
            w = A @ v
            rho = float(np.real(np.vdot(v, w)))
            nw = float(np.linalg.norm(w))
            if nw < 1e-300:
                break  # start vector fell into the kernel; restart
            v = w / nw
            if abs(rho - rho_prev) <= rel_tol * max(rho, 1e-300):
                x = _takagi_polish(B, v)
                value = float(abs(x @ (B @ x)))
                return GrunskyNormEstimate(
                    value, N, ((N, value),), x, None, target
                )
            rho_prev = rho
    raise GrunskyError(
        f"norm iteration did not converge within budget {budget}"
    )


def homotopy_scaling(matrix: GrunskyMatrix, t: float) -> GrunskyMatrix:
    """Grunsky block of the radial homotopy: beta_mn -> beta_mn t^(m+n),
    i.e. the two-sided diagonal scaling D_t B D_t."""
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise GrunskyError("homotopy parameter must lie in (0, 1]")
    d = t ** np.arange(1, matrix.truncation + 1)
    return GrunskyMatrix(matrix.entries * np.outer(d, d), matrix.truncation)


def norm_sweep(
    series: SigmaSeries,
    truncations,
    *,
    seed: int = 0,
    target: float | None = None,
) -> GrunskyNormEstimate:
    """Norms over increasing truncations with a monotonicity certificate.

    Truncated norms of a fixed series are nondecreasing in N; a decrease
    beyond 1e-12 therefore flags an internal inconsistency and raises.
    The final Cauchy gap (last increment) is attached as a convergence
    indicator.
    """
    Ns = [int(n) for n in truncations]
    if len(Ns) == 0 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise GrunskyError("truncations must be strictly increasing")
    if Ns[0] < 1:
        raise GrunskyError("truncations must be positive")
    full = grunsky_coefficients(series, Ns[-1])
    values = []
    cert = None
    for n in Ns:
        block = GrunskyMatrix(full.entries[:n, :n], n)
        est = grunsky_norm(block, rel_tol=1e-13, seed=seed)
        values.append(est.value)
        cert = est.certificate_vector
    for a, b in zip(values, values[1:]):
        if b < a - 1e-12 * max(1.0, a):
            raise GrunskyError(
                f"truncated norms decreased ({a} -> {b}); "
                "internal consistency violated"
            )
    gap = values[-1] - values[-2] if len(values) >= 2 else None
    return GrunskyNormEstimate(
        value=values[-1],
        truncation=Ns[-1],
        monotone_certificate=tuple(zip(Ns, values)),
        certificate_vector=cert,
        cauchy_gap=gap,
        target=target,
    )
