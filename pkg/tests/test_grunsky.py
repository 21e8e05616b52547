"""Grunsky blocks checked against a Faber-polynomial oracle, full SVD,
and frozen norm values for the square and the quarter-plane wedge."""

import json

import numpy as np
import pytest

from polyrefl.geometry import PolygonalLine
from polyrefl.conformal import (
    SigmaSeries,
    TaylorSeries,
    homotopy,
    invert_to_sigma,
    sc_solve,
    taylor_coefficients,
)
from polyrefl.grunsky import (
    GrunskyError,
    GrunskyMatrix,
    grunsky_coefficients,
    grunsky_norm,
    homotopy_scaling,
    matrix_from_json,
    norm_sweep,
)

from oracles import faber_grunsky, svd_norm

SQUARE = PolygonalLine([0, 1, 1 + 1j, 1j], closed=True)
QUADRANT = PolygonalLine([0], ray_directions=(1j, 1.0))

# norms of truncated blocks for the unit square's interior map
SQUARE_NORMS = {
    8: 0.245359106703,
    16: 0.282532891485,
    32: 0.312294185350,
    64: 0.336220079930,
}
# and for the quarter-plane wedge at z = 0
WEDGE_NORM_128 = 0.419756597196


@pytest.fixture(scope="module")
def square_sigma():
    m = sc_solve(SQUARE)
    return invert_to_sigma(taylor_coefficients(m, 129))


@pytest.fixture(scope="module")
def wedge_sigma():
    m = sc_solve(QUADRANT)
    return invert_to_sigma(taylor_coefficients(m, 257))


def decaying_sigma(rng, length, scale=0.4):
    b = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    return SigmaSeries(b * scale / (1.0 + np.arange(length)))


class TestCoefficients:
    def test_slit_map_gives_identity(self):
        # F(z) = z + 1/z maps |z| > 1 onto the complement of [-2, 2]
        b = np.zeros(12, dtype=complex)
        b[1] = 1.0
        M = grunsky_coefficients(SigmaSeries(b), 6)
        assert np.allclose(M.entries, np.eye(6), atol=1e-13)

    def test_zero_tail_gives_zero_block(self):
        M = grunsky_coefficients(SigmaSeries(np.zeros(10)), 5)
        assert np.all(M.entries == 0)

    def test_koebe_block(self):
        # a_n = n inverts to b = [-2, 1, 0, ...]: same block as the slit
        a = np.arange(1, 24, dtype=complex)
        sigma = invert_to_sigma(TaylorSeries(a))
        M = grunsky_coefficients(sigma, 11)
        assert abs(M.entries[0, 0] - 1.0) < 1e-12
        assert np.allclose(M.entries, np.eye(11), atol=1e-11)

    def test_matches_faber_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(4):
            sigma = decaying_sigma(rng, 20)
            M = grunsky_coefficients(sigma, 10)
            ref = faber_grunsky(sigma.coefficients, 10)
            scale = max(1.0, np.max(np.abs(ref)))
            assert np.max(np.abs(M.entries - ref)) < 1e-10 * scale

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        M = grunsky_coefficients(decaying_sigma(rng, 30), 15)
        assert np.max(np.abs(M.entries - M.entries.T)) < 1e-13

    def test_insufficient_coefficients(self):
        with pytest.raises(GrunskyError, match="need at least 16"):
            grunsky_coefficients(SigmaSeries(np.zeros(10)), 8)

    def test_rejects_taylor_input(self):
        s = TaylorSeries(np.array([1.0, 0.1, 0.0, 0.0]))
        with pytest.raises(GrunskyError, match="SigmaSeries"):
            grunsky_coefficients(s, 2)

    def test_rejects_bad_truncation(self):
        with pytest.raises(GrunskyError):
            grunsky_coefficients(SigmaSeries(np.zeros(10)), 0)


class TestNorm:
    def test_slit_norm_and_certificate(self):
        b = np.zeros(16, dtype=complex)
        b[1] = 1.0
        M = grunsky_coefficients(SigmaSeries(b), 8)
        est = grunsky_norm(M)
        assert abs(est.value - 1.0) < 1e-12
        x = est.certificate_vector
        assert abs(np.linalg.norm(x) - 1.0) < 1e-12
        assert abs(abs(x @ (M.entries @ x)) - est.value) < 1e-12

    def test_zero_matrix(self):
        M = grunsky_coefficients(SigmaSeries(np.zeros(10)), 5)
        est = grunsky_norm(M)
        assert est.value == 0.0
        assert est.monotone_certificate == ((5, 0.0),)

    def test_against_svd(self):
        rng = np.random.default_rng(17)
        for _ in range(6):
            sigma = decaying_sigma(rng, 24, scale=0.6)
            M = grunsky_coefficients(sigma, 12)
            est = grunsky_norm(M)
            ref = svd_norm(M.entries)
            assert abs(est.value - ref) < 1e-8 * max(1.0, ref)
            x = est.certificate_vector
            assert abs(abs(x @ (M.entries @ x)) - est.value) < 1e-12

    def test_value_is_lower_estimate(self):
        rng = np.random.default_rng(23)
        M = grunsky_coefficients(decaying_sigma(rng, 40, scale=0.8), 20)
        est = grunsky_norm(M)
        assert est.value <= svd_norm(M.entries) + 1e-10


class TestFrozenValues:
    def test_square_sweep(self, square_sigma):
        Ns = (8, 16, 32, 64)
        est = norm_sweep(square_sigma, Ns)
        got = dict(est.monotone_certificate)
        for n in Ns:
            assert abs(got[n] - SQUARE_NORMS[n]) < 1e-9
        assert est.value == got[64]
        assert est.truncation == 64
        assert est.cauchy_gap == pytest.approx(got[64] - got[32])
        vals = [got[n] for n in Ns]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_square_univalence_bound(self, square_sigma):
        est = norm_sweep(square_sigma, (8, 16, 32, 64))
        assert est.value <= 1.0 + 1e-9

    def test_wedge_norm(self, wedge_sigma):
        est = norm_sweep(wedge_sigma, (16, 64, 128))
        assert abs(est.value - WEDGE_NORM_128) < 1e-9
        # truncations of the quadrant never exceed its reflection
        # coefficient 1/2
        assert est.value <= 0.5 + 1e-9
        vals = [v for _, v in est.monotone_certificate]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestHomotopy:
    def test_two_path_agreement(self):
        rng = np.random.default_rng(11)
        N = 10
        tail = rng.normal(size=2 * N) + 1j * rng.normal(size=2 * N)
        tail *= 0.3 / (2.0 + np.arange(2 * N)) ** 2
        s = TaylorSeries(np.concatenate(([1.0 + 0j], tail)))
        base = grunsky_coefficients(invert_to_sigma(s), N)
        for t in (0.3, 0.7, 1.0):
            A = homotopy_scaling(base, t)
            B = grunsky_coefficients(invert_to_sigma(homotopy(s, t)), N)
            assert np.allclose(A.entries, B.entries, rtol=1e-12, atol=1e-12)

    def test_scaled_norms_nondecreasing(self, wedge_sigma):
        base = grunsky_coefficients(wedge_sigma, 32)
        vals = [
            grunsky_norm(homotopy_scaling(base, t)).value
            for t in (0.2, 0.5, 0.8, 1.0)
        ]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_parameter_domain(self, wedge_sigma):
        base = grunsky_coefficients(wedge_sigma, 8)
        for t in (0.0, -0.3, 1.2):
            with pytest.raises(GrunskyError):
                homotopy_scaling(base, t)

    def test_unit_parameter_is_identity(self, wedge_sigma):
        base = grunsky_coefficients(wedge_sigma, 8)
        assert np.array_equal(homotopy_scaling(base, 1.0).entries,
                              base.entries)


class TestSweep:
    def test_target_passthrough(self, wedge_sigma):
        est = norm_sweep(wedge_sigma, (8, 16), target=0.5)
        assert est.target == 0.5

    def test_rejects_unordered_truncations(self, wedge_sigma):
        for bad in ((8, 8), (16, 8), ()):
            with pytest.raises(GrunskyError):
                norm_sweep(wedge_sigma, bad)


class TestSerialization:
    def test_roundtrip(self):
        rng = np.random.default_rng(29)
        M = grunsky_coefficients(decaying_sigma(rng, 12), 6)
        back = matrix_from_json(json.loads(json.dumps(M.to_json())))
        assert np.array_equal(back.entries, M.entries)
        assert back.truncation == 6

    def test_rejects_wrong_kind(self):
        with pytest.raises(GrunskyError):
            matrix_from_json({"kind": "taylor-S", "coefficients": []})

    def test_matrix_validation(self):
        with pytest.raises(GrunskyError, match="symmetric"):
            GrunskyMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]), 2)
        with pytest.raises(GrunskyError, match="N x N"):
            GrunskyMatrix(np.zeros((2, 3)), 2)
        with pytest.raises(GrunskyError, match="finite"):
            GrunskyMatrix(np.array([[np.nan]]), 1)
