"""Tooth-row generators, Hausdorff metrics, staircases, and the
per-iteration invariant tables."""

import math

import numpy as np
import pytest

from polyrefl.fractal import (
    FractalError,
    LadderSpec,
    Similarity,
    SnowflakeSpec,
    extend_periodic,
    hausdorff_dimension,
    hausdorff_distance,
    iterate,
    iteration_invariants,
    koch_spec,
    ladder_line,
)
from polyrefl.geometry import (
    PolygonalLine,
    deviation,
    interior_angles,
    validate_simple,
)
from polyrefl.invariants import NON_INFORMATIVE, invariants_of

from oracles import sampled_hausdorff

SQRT3 = math.sqrt(3.0)

# log 4 / log 3, evaluated once and pinned
DIM_THIRD = 1.2618595071429148


def curl_spec(t=0.4):
    """A valid tooth row that curls instead of pointing: the first gap
    rises vertically.  Simple at shallow depth, self-crossing at depth 3."""
    z2 = 1j * 6.0 * t
    z3 = z2 + 6.0 * t
    m = (z3 + 6.0) / 2.0
    d = abs(6.0 - z3)
    off = math.sqrt((6.0 * t) ** 2 - (d / 2.0) ** 2)
    perp = 1j * (6.0 - z3) / d
    pts = np.array([0.0, z2, z3, m - off * perp, 6.0], dtype=complex)
    sims = tuple(
        Similarity((pts[j + 1] - pts[j]) / 6.0, pts[j]) for j in range(4)
    )
    return SnowflakeSpec(t, pts, sims)


class TestSpec:
    def test_koch_third_base_points(self):
        spec = koch_spec(1.0 / 3.0)
        expect = np.array([0.0, 2.0, 3.0 + 1j * SQRT3, 4.0, 6.0], dtype=complex)
        assert np.allclose(spec.base_points, expect, rtol=0.0, atol=1e-12)

    @pytest.mark.parametrize("t", [0.26, 1.0 / 3.0, 0.4, 0.49])
    def test_gap_lengths(self, t):
        spec = koch_spec(t)
        gaps = np.abs(np.diff(spec.base_points))
        assert np.allclose(gaps, 6.0 * t, rtol=0.0, atol=1e-12)

    def test_similarities_map_segment_onto_gaps(self):
        spec = koch_spec(0.3)
        for j, sim in enumerate(spec.similarities):
            assert abs(sim.ratio - 0.3) <= 1e-12
            assert abs(complex(sim.apply(0.0)) - spec.base_points[j]) <= 1e-12
            assert abs(complex(sim.apply(6.0)) - spec.base_points[j + 1]) <= 1e-12

    def test_apex_above_baseline(self):
        assert koch_spec(0.2501).base_points[2].imag > 0.0
        assert koch_spec(0.49).base_points[2].imag > 2.0

    @pytest.mark.parametrize("t", [0.25, 0.5, 0.1, 0.75, -0.3])
    def test_ratio_domain(self, t):
        with pytest.raises(FractalError, match="between 1/4 and 1/2"):
            koch_spec(t)

    def test_rejects_wrong_point_count(self):
        spec = koch_spec(0.3)
        with pytest.raises(FractalError, match="5 base points"):
            SnowflakeSpec(0.3, spec.base_points[:4], spec.similarities)

    def test_rejects_wrong_endpoints(self):
        spec = koch_spec(0.3)
        with pytest.raises(FractalError, match="from 0 to 6"):
            SnowflakeSpec(0.3, spec.base_points + 0.5, spec.similarities)

    def test_rejects_unequal_gaps(self):
        spec = koch_spec(0.3)
        pts = spec.base_points.copy()
        pts[2] += 0.2j
        with pytest.raises(FractalError, match="6 \\* ratio"):
            SnowflakeSpec(0.3, pts, spec.similarities)

    def test_rejects_mismatched_similarity(self):
        spec = koch_spec(0.3)
        bad = spec.similarities[:3] + (Similarity(0.3, 0.0),)
        with pytest.raises(FractalError, match="does not map"):
            SnowflakeSpec(0.3, spec.base_points, bad)

    def test_rejects_wrong_similarity_ratio(self):
        spec = koch_spec(0.3)
        bad = (Similarity(0.45, 0.0),) + spec.similarities[1:]
        with pytest.raises(FractalError, match="ratio"):
            SnowflakeSpec(0.3, spec.base_points, bad)


class TestIterate:
    def test_depth_zero_is_the_segment(self):
        arc = iterate(koch_spec(1.0 / 3.0), 0)
        assert np.array_equal(arc.vertices, np.array([0.0, 6.0], dtype=complex))
        assert not arc.closed and not arc.unbounded

    @pytest.mark.parametrize("depth", [0, 1, 2, 3, 4])
    def test_vertex_counts_and_endpoints(self, depth):
        arc = iterate(koch_spec(0.3), depth)
        assert arc.n == 4 ** depth + 1
        assert arc.vertices[0] == 0.0
        assert arc.vertices[-1] == 6.0

    @pytest.mark.parametrize("depth", [1, 2, 3, 4])
    def test_refinement_keeps_coarse_vertices(self, depth):
        spec = koch_spec(1.0 / 3.0)
        coarse = iterate(spec, depth - 1).vertices
        fine = iterate(spec, depth).vertices
        assert np.allclose(fine[::4], coarse, rtol=0.0, atol=1e-12)

    def test_uniform_edge_lengths(self):
        arc = iterate(koch_spec(0.3), 3)
        lengths = np.abs(np.diff(arc.vertices))
        assert np.allclose(lengths, 6.0 * 0.3 ** 3, rtol=0.0, atol=1e-12)

    def test_stays_in_upper_half_plane(self):
        arc = iterate(koch_spec(1.0 / 3.0), 4)
        assert arc.vertices.imag.min() >= -1e-12

    def test_simple_at_checkable_depths(self):
        spec = koch_spec(0.45)
        for depth in range(5):
            assert validate_simple(iterate(spec, depth))

    def test_depth_must_be_a_nonnegative_integer(self):
        spec = koch_spec(0.3)
        with pytest.raises(FractalError, match="nonnegative"):
            iterate(spec, -1)
        with pytest.raises(FractalError, match="integer"):
            iterate(spec, 2.5)

    def test_depth_budget(self):
        with pytest.raises(FractalError, match="memory budget"):
            iterate(koch_spec(0.3), 11)

    def test_overlapping_images_abort(self):
        spec = curl_spec()
        assert iterate(spec, 2).n == 17
        with pytest.raises(FractalError, match="intersect"):
            iterate(spec, 3)


class TestExtendPeriodic:
    def test_three_copies_of_one_tooth(self):
        line = extend_periodic(koch_spec(1.0 / 3.0), 1, 3)
        assert line.n == 13
        assert line.unbounded
        assert line.ray_directions == (-1.0 + 0.0j, 1.0 + 0.0j)
        assert line.vertices[0] == 0.0
        assert line.vertices[-1] == 18.0

    def test_translated_blocks_share_endpoints(self):
        line = extend_periodic(koch_spec(0.3), 1, 3)
        v = line.vertices
        assert np.allclose(v[4:9], v[0:5] + 6.0, rtol=0.0, atol=1e-12)
        assert np.allclose(v[8:13], v[0:5] + 12.0, rtol=0.0, atol=1e-12)

    def test_extension_is_simple(self):
        assert validate_simple(extend_periodic(koch_spec(0.3), 2, 3))

    def test_copy_count_domain(self):
        spec = koch_spec(0.3)
        with pytest.raises(FractalError, match="at least one copy"):
            extend_periodic(spec, 1, 0)
        with pytest.raises(FractalError, match="memory budget"):
            extend_periodic(spec, 9, 100)


class TestHausdorffDistance:
    def test_segment_to_tooth_is_sqrt3(self):
        spec = koch_spec(1.0 / 3.0)
        seg, tooth = iterate(spec, 0), iterate(spec, 1)
        d = hausdorff_distance(seg, tooth)
        assert abs(d - SQRT3) <= 1e-6
        assert hausdorff_distance(tooth, seg) == d

    def test_identical_lines(self):
        arc = iterate(koch_spec(0.3), 3)
        assert hausdorff_distance(arc, arc) == 0.0

    def test_point_against_segment(self):
        d = hausdorff_distance(np.array([3.0 + 4.0j]), np.array([0.0, 6.0 + 0.0j]))
        assert abs(d - 5.0) <= 1e-9

    def test_translated_segment(self):
        seg = np.array([0.0, 6.0 + 0.0j])
        assert abs(hausdorff_distance(seg, seg + 2.0j) - 2.0) <= 1e-9

    def test_closed_polygons_use_the_closing_edge(self):
        square = PolygonalLine([0, 1, 1 + 1j, 1j], closed=True)
        shifted = PolygonalLine(square.vertices + 0.5, closed=True)
        assert abs(hausdorff_distance(square, shifted) - 0.5) <= 1e-7

    def test_symmetry_and_scaling(self):
        rng = np.random.default_rng(11)
        for _ in range(6):
            a = rng.normal(size=5) + 1j * rng.normal(size=5)
            b = rng.normal(size=7) + 1j * rng.normal(size=7)
            d = hausdorff_distance(a, b)
            assert hausdorff_distance(b, a) == d
            assert abs(hausdorff_distance(3.0 * a, 3.0 * b) - 3.0 * d) <= 3e-6 * max(d, 1.0)

    def test_against_dense_sampling(self):
        rng = np.random.default_rng(7)
        for _ in range(8):
            a = rng.normal(size=6) + 1j * rng.normal(size=6)
            b = rng.normal(size=4) + 1j * rng.normal(size=4)
            fast = hausdorff_distance(a, b)
            oracle = sampled_hausdorff(a, b)
            step = max(np.abs(np.diff(a)).max(), np.abs(np.diff(b)).max()) / 400.0
            assert fast >= oracle - 1e-9
            assert fast <= oracle + step / 2.0 + 1e-9

    def test_refinement_steps_scale_by_the_ratio(self):
        t = 1.0 / 3.0
        spec = koch_spec(t)
        arcs = [iterate(spec, depth) for depth in range(7)]
        steps = [
            hausdorff_distance(arcs[depth - 1], arcs[depth])
            for depth in range(1, 7)
        ]
        assert abs(steps[0] - SQRT3) <= 1e-6
        for prev, cur in zip(steps, steps[1:]):
            assert t - 0.05 <= cur / prev <= t + 0.05

    def test_rejects_empty_and_unbounded(self):
        with pytest.raises(FractalError, match="empty"):
            hausdorff_distance(np.array([], dtype=complex), np.array([0.0]))
        line = extend_periodic(koch_spec(0.3), 1, 1)
        with pytest.raises(FractalError, match="finite truncation"):
            hausdorff_distance(line, np.array([0.0, 1.0]))

    def test_rejects_nonfinite_points(self):
        with pytest.raises(FractalError, match="finite"):
            hausdorff_distance(np.array([0.0, np.nan + 0.0j]), np.array([0.0]))


class TestDimension:
    def test_frozen_value_at_one_third(self):
        d = hausdorff_dimension(1.0 / 3.0)
        assert abs(d - DIM_THIRD) <= 1e-5
        assert abs(d - math.log(4.0) / math.log(3.0)) <= 1e-12

    def test_limits(self):
        assert 1.0 < hausdorff_dimension(0.2500001) < 1.0001
        assert 1.9999 < hausdorff_dimension(0.4999999) < 2.0

    def test_strictly_increasing(self):
        grid = np.linspace(0.26, 0.49, 24)
        values = [hausdorff_dimension(t) for t in grid]
        assert all(b > a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("t", [0.25, 0.5, 0.0, 0.9])
    def test_domain(self, t):
        with pytest.raises(FractalError, match="between 1/4 and 1/2"):
            hausdorff_dimension(t)


class TestLadder:
    def test_line_shape(self):
        line = ladder_line(LadderSpec((1.0, 2.0, 1.0), (1.0, 0.5, 2.0)))
        assert line.n == 7
        assert line.unbounded
        assert line.ray_directions == (-1.0 + 0.0j, 1.0 + 0.0j)

    def test_right_angles_only(self):
        line = ladder_line(LadderSpec((1.0, 2.0), (1.5, 1.0)))
        finite = [
            f.value
            for f in interior_angles(line)
            if not f.at_infinity and not f.removable
        ]
        assert all(abs(v - 0.5) <= 1e-12 or abs(v - 1.5) <= 1e-12 for v in finite)
        assert abs(deviation(interior_angles(line)) - 0.5) <= 1e-12

    def test_periodic_tail_extends_the_steps(self):
        spec = LadderSpec((1.0, 2.0), (1.5, 1.0))
        line = ladder_line(spec, steps=5)
        assert line.n == 11
        # step 3 repeats step 1
        v = line.vertices
        assert abs((v[5] - v[4]) - (v[1] - v[0])) <= 1e-12

    def test_finite_ladder_stops_at_its_data(self):
        spec = LadderSpec((1.0,), (1.0,), periodic=False)
        with pytest.raises(FractalError, match="no periodic tail"):
            ladder_line(spec, steps=3)

    def test_needs_a_step(self):
        spec = LadderSpec((1.0,), (1.0,))
        with pytest.raises(FractalError, match="at least one step"):
            ladder_line(spec, steps=0)

    def test_spec_validation(self):
        with pytest.raises(FractalError, match="equal length"):
            LadderSpec((1.0, 2.0), (1.0,))
        with pytest.raises(FractalError, match="equal length"):
            LadderSpec((), ())
        with pytest.raises(FractalError, match="crossbar lengths must be positive"):
            LadderSpec((0.0,), (1.0,))
        with pytest.raises(FractalError, match="step heights must be positive"):
            LadderSpec((1.0,), (-2.0,))


class TestIterationTable:
    def test_snowflake_rows_at_one_third(self):
        summary = iteration_invariants(koch_spec(1.0 / 3.0), 3)
        assert [row.index for row in summary.rows] == [1, 2, 3]
        assert [row.vertex_count for row in summary.rows] == [5, 17, 65]
        assert abs(summary.rows[0].hausdorff_step - SQRT3) <= 1e-6
        assert abs(summary.rows[1].hausdorff_step - SQRT3 / 3.0) <= 1e-6
        for row in summary.rows:
            assert row.unbounded.status == "exact"
            assert row.unbounded.source == "T2"
            assert not row.unbounded.downgraded
            assert abs(row.unbounded.reflection - 2.0 / 3.0) <= 1e-12
            assert row.complement.status == "exact"
            assert abs(row.complement.reflection - 2.0 / 3.0) <= 1e-12

    def test_closed_rows_carry_two_sided_bounds(self):
        summary = iteration_invariants(koch_spec(1.0 / 3.0), 2)
        for row in summary.rows:
            assert row.closed.status == "bounds"
            assert row.closed.source == "T5"
            assert abs(row.closed.lower - 2.0 / 3.0) <= 1e-9
            assert row.closed.upper == 1.0
            assert NON_INFORMATIVE in row.closed.hypothesis_notes

    def test_limit_bound_is_not_exact(self):
        summary = iteration_invariants(koch_spec(1.0 / 3.0), 1)
        limit = summary.limit
        assert limit.status == "bounds"
        assert limit.source == "T6"
        assert abs(limit.lower - 2.0 / 3.0) <= 1e-9
        assert any("rhombus increment" in n for n in limit.hypothesis_notes)

    def test_shallow_teeth_meet_the_grounding_corners(self):
        # closing the arc adds right angles, so the closed reading cannot
        # drop below 1/2 even when the teeth are nearly flat
        summary = iteration_invariants(koch_spec(0.26), 2)
        row = summary.rows[-1]
        assert row.unbounded.reflection < 0.3
        assert abs(row.closed.lower - 0.5) <= 1e-12

    def test_declared_tail_reading_downgrades_in_the_fjords(self):
        # from depth 3 on, some valley vertices cannot see infinity along
        # any ray, so the countable-tail reading yields only a lower bound
        ext = extend_periodic(koch_spec(1.0 / 3.0), 3, 1)
        report = invariants_of(ext, tail_sup=2.0 / 3.0)
        assert report.status == "bounds"
        assert report.downgraded
        assert report.lower >= 2.0 / 3.0 - 1e-9
        assert report.upper == 1.0

    def test_ladder_rows_are_exact_at_every_truncation(self):
        summary = iteration_invariants(LadderSpec((1.0, 2.0), (1.5, 1.0)), 5)
        assert len(summary.rows) == 5
        for row in summary.rows:
            for report in (row.unbounded, row.complement):
                assert report.status == "exact"
                assert report.source == "T3"
                assert report.reflection == 0.5
            assert row.closed.lower == 0.5
            assert row.closed.upper == 1.0
        assert summary.limit.lower == 0.5
        assert summary.limit.status == "bounds"

    def test_ladder_hausdorff_steps(self):
        summary = iteration_invariants(LadderSpec((1.0,), (1.0,)), 2)
        assert summary.rows[0].hausdorff_step is None
        assert abs(summary.rows[1].hausdorff_step - math.sqrt(2.0)) <= 1e-7

    def test_depth_and_spec_type_domain(self):
        with pytest.raises(FractalError, match="at least one iteration"):
            iteration_invariants(koch_spec(0.3), 0)
        with pytest.raises(FractalError, match="SnowflakeSpec or a LadderSpec"):
            iteration_invariants("ladder", 2)
