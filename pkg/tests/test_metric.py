import math

import numpy as np
import pytest

from lfpp.field import GridSpec, LatticeField, DETERMINISTIC
from lfpp.metric import (
    EDGE_WEIGHTED,
    VERTEX_SUM,
    MetricProblem,
    build_lattice_graph,
    c_good_statistic,
    cycle_separates,
    geodesic_tube_area,
    lattice_distance,
    ring_vertices,
)
from lfpp.mollify import from_values
from lfpp.params import LqgParams

from oracle_paths import compile_paths, enumerate_simple_paths, min_path_cost

PARAMS = LqgParams.pure_gravity()
SQRT2 = math.sqrt(2.0)


def octile(spacing, a, b):
    """Chamfer (1, sqrt 2) distance between grid vertices, the exact value
    of the 8-neighbor shortest path under unit weights."""
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    lo, hi = min(dx, dy), max(dx, dy)
    return spacing * ((hi - lo) + SQRT2 * lo)


def zero_problem(n=64, side=1.0, convention=EDGE_WEIGHTED, mask=None):
    spec = GridSpec(n=n, spacing=side / (n - 1))
    mf = from_values(spec, np.zeros((n, n)), 0.1)
    return MetricProblem(mf, PARAMS, convention, mask=mask)


def random_problem(n, seed, convention, spacing=0.1):
    spec = GridSpec(n=n, spacing=spacing)
    rng = np.random.default_rng(seed)
    vals = rng.normal(0.0, 1.0, (n, n))
    mf = from_values(spec, vals, 0.5)
    return MetricProblem(mf, PARAMS, convention)


class TestEnumerationEquivalence:
    @pytest.mark.parametrize("convention", [VERTEX_SUM, EDGE_WEIGHTED])
    def test_small_grids_exact(self, convention):
        rng = np.random.default_rng(2)
        for shape in ((2, 2), (3, 3), (3, 4)):
            src = (0, 0)
            dst = (shape[0] - 1, shape[1] - 1)
            groups = compile_paths(shape, enumerate_simple_paths(shape, src, dst))
            for _ in range(30):
                w = np.exp(rng.normal(0.0, 1.0, shape))
                got = lattice_distance(w, 0.37, convention, src, dst)
                want = min_path_cost(w, 0.37, convention, src, groups)
                assert got == want


class TestChamferOracle:
    def test_zero_field_distances_are_octile(self):
        prob = zero_problem(n=32)
        d = prob.multi_source_distance([(5, 7)])
        s = prob.spacing
        for i in range(0, 32, 5):
            for j in range(0, 32, 7):
                assert d[i, j] == pytest.approx(octile(s, (5, 7), (i, j)), rel=1e-12, abs=1e-15)

    def test_unit_square_corner_to_corner(self):
        prob = zero_problem(n=64, side=1.0)
        res = prob.distance((0, 0), (63, 63))
        assert res.distance == pytest.approx(SQRT2, rel=1e-12)

    def test_vertex_sum_counts_path_vertices(self):
        prob = zero_problem(n=16, convention=VERTEX_SUM)
        res = prob.distance((0, 0), (0, 9))
        assert res.distance == 10.0  # both endpoints pay their weight
        assert prob.distance((3, 3), (3, 3)).distance == 1.0

    def test_metric_ball_equals_chamfer_ball(self):
        prob = zero_problem(n=64, side=1.0)
        s = prob.spacing
        center = (31, 31)
        radius = 0.2503  # strictly between attained chamfer values
        ball = prob.metric_ball(center, radius)
        expect = np.zeros((64, 64), dtype=bool)
        for i in range(64):
            for j in range(64):
                expect[i, j] = octile(s, center, (i, j)) <= radius
        np.testing.assert_array_equal(ball.membership, expect)
        assert len(ball.boundary) > 0
        assert all(ball.membership[v] for v in ball.boundary)


class TestQueries:
    @pytest.mark.parametrize("convention", [VERTEX_SUM, EDGE_WEIGHTED])
    def test_geodesic_is_valid_and_reprices(self, convention):
        prob = random_problem(32, 3, convention)
        res = prob.distance((1, 2), (20, 17))
        assert res.reached
        assert res.path[0] == (1, 2) and res.path[-1] == (20, 17)
        for u, v in zip(res.path[:-1], res.path[1:]):
            assert max(abs(u[0] - v[0]), abs(u[1] - v[1])) == 1
        assert prob.path_cost(res.path) == pytest.approx(res.distance, rel=1e-12)

    @pytest.mark.parametrize("convention", [VERTEX_SUM, EDGE_WEIGHTED])
    def test_symmetry(self, convention):
        prob = random_problem(32, 4, convention)
        a = prob.distance((0, 0), (19, 11)).distance
        b = prob.distance((19, 11), (0, 0)).distance
        assert a == pytest.approx(b, rel=1e-12)

    def test_triangle_inequality(self):
        prob = random_problem(32, 5, EDGE_WEIGHTED)
        rng = np.random.default_rng(6)
        for _ in range(20):
            x, y, z = [tuple(int(v) for v in rng.integers(0, 32, 2)) for _ in range(3)]
            dxy = prob.distance(x, y).distance
            dyz = prob.distance(y, z).distance
            dxz = prob.distance(x, z).distance
            assert dxz <= dxy + dyz + 1e-12

    def test_multi_source_is_min_over_sources(self):
        prob = random_problem(16, 7, EDGE_WEIGHTED)
        sources = [(0, 0), (15, 15), (3, 12)]
        d = prob.multi_source_distance(sources)
        for tgt in ((8, 8), (1, 14), (15, 0)):
            want = min(prob.distance(s, tgt).distance for s in sources)
            assert d[tgt] == pytest.approx(want, rel=1e-12)

    def test_multi_source_vertex_sum_charges_source_once(self):
        prob = random_problem(16, 8, VERTEX_SUM)
        d = prob.multi_source_distance([(2, 2)])
        assert d[2, 2] == pytest.approx(prob.vertex_weight[2, 2], rel=1e-12)

    def test_masked_vertex_rejected(self):
        mask = np.ones((64, 64), dtype=bool)
        mask[10, 10] = False
        prob = zero_problem(n=64, mask=mask)
        with pytest.raises(ValueError):
            prob.distance((10, 10), (0, 0))

    def test_disconnected_mask_unreachable(self):
        mask = np.ones((16, 16), dtype=bool)
        mask[8, :] = False  # horizontal wall splits the grid
        # wall must block diagonals too: make it two rows thick
        mask[7, :] = False
        prob = zero_problem(n=16, mask=mask)
        res = prob.distance((0, 0), (15, 15))
        assert not res.reached and res.distance == math.inf

    def test_internal_distance_detour(self):
        # a one-vertex-wide corridor forces the geodesic along a known path
        n = 16
        mask = np.zeros((n, n), dtype=bool)
        mask[0, :] = True       # along +y
        mask[:, n - 1] = True   # then along +x
        prob = zero_problem(n=n, side=1.5, mask=mask)
        res = prob.distance((0, 0), (n - 1, n - 1))
        s = prob.spacing
        # straight runs on both legs with a single diagonal at the corner
        want = 2 * (n - 2) * s + SQRT2 * s
        assert res.distance == pytest.approx(want, rel=1e-12)

    def test_internal_vs_ambient(self):
        prob = random_problem(32, 9, EDGE_WEIGHTED)
        sub = np.zeros((32, 32), dtype=bool)
        sub[:8, :] = True
        amb = prob.distance((0, 0), (7, 23)).distance
        internal = prob.internal_distance((0, 0), (7, 23), sub).distance
        assert internal >= amb - 1e-15

    def test_submask_containment_enforced(self):
        mask = np.zeros((16, 16), dtype=bool)
        mask[:8, :] = True
        prob = zero_problem(n=16, mask=mask)
        bad = np.ones((16, 16), dtype=bool)
        with pytest.raises(ValueError):
            prob.internal_distance((0, 0), (5, 5), bad)


class TestCrossing:
    def test_constant_zero_edge_weighted(self):
        # square aligned with the lattice: crossing = its physical width
        prob = zero_problem(n=64, side=1.0)
        val = prob.crossing_distance((0.0, 0.0, 1.0))
        assert val == pytest.approx(1.0, rel=1e-12)

    def test_constant_zero_vertex_sum_counts_columns(self):
        prob = zero_problem(n=64, side=1.0, convention=VERTEX_SUM)
        val = prob.crossing_distance((0.0, 0.0, 1.0))
        assert val == 64.0

    def test_sub_square(self):
        prob = zero_problem(n=64, side=1.0)
        val = prob.crossing_distance((0.25, 0.25, 0.5))
        # columns snap to the lattice, so allow one spacing of slack
        assert val == pytest.approx(0.5, abs=2 * prob.spacing)

    def test_degenerate_square_rejected(self):
        prob = zero_problem()
        with pytest.raises(ValueError):
            prob.crossing_distance((0.0, 0.0, 0.0))


class TestAnnulusCycle:
    def _setup(self, convention):
        n = 128
        spec = GridSpec(n=n, spacing=2.0 / (n - 1), origin=(-1.0, -1.0))
        mf = from_values(spec, np.zeros((n, n)), 0.1)
        return MetricProblem(mf, PARAMS, convention)

    def test_constant_field_cycle_cost_and_separation(self):
        prob = self._setup(EDGE_WEIGHTED)
        res = prob.distance_around_annulus((0.0, 0.0), 0.3, 0.7)
        assert res.reached
        assert res.path[0] == res.path[-1]  # closed cycle
        # separating curve must be at least the inner circumference and at
        # most a snug lattice octagon around it
        assert 2 * math.pi * 0.3 * 0.99 <= res.distance <= 7.0 * 0.3
        n = prob.n
        assert cycle_separates(prob.mask, res.path, [(n // 2, n // 2)], [(0, 0), (n - 1, n - 1)])

    def test_vertex_sum_counts_cycle_vertices(self):
        prob = self._setup(VERTEX_SUM)
        res = prob.distance_around_annulus((0.0, 0.0), 0.3, 0.7)
        assert res.distance == float(len(res.path) - 1)  # each distinct vertex once

    def test_thin_annulus_rejected(self):
        prob = self._setup(EDGE_WEIGHTED)
        with pytest.raises(ValueError):
            prob.distance_around_annulus((0.0, 0.0), 0.3, 0.31)

    def test_bad_radii_rejected(self):
        prob = self._setup(EDGE_WEIGHTED)
        with pytest.raises(ValueError):
            prob.distance_around_annulus((0.0, 0.0), 0.7, 0.3)


class TestGeometryHelpers:
    def test_ring_vertices_near_radius(self):
        prob = zero_problem(n=64, side=2.0)
        spec = prob.field.spec
        ring = ring_vertices(prob, spec.center, 0.5)
        assert len(ring) > 0
        s = prob.spacing
        for (i, j) in ring:
            x = spec.origin[0] + i * s
            y = spec.origin[1] + j * s
            r = math.hypot(x - spec.center[0], y - spec.center[1])
            assert r <= 0.5
            assert r > 0.5 - 2.5 * s

    def test_c_good_statistic_constant_field(self):
        n = 128
        spec = GridSpec(n=n, spacing=2.0 / (n - 1), origin=(-1.0, -1.0))
        mf = from_values(spec, np.zeros((n, n)), 0.1)
        prob = MetricProblem(mf, PARAMS, EDGE_WEIGHTED)
        c = c_good_statistic(prob, (0.0, 0.0), 0.35)
        assert 2.0 <= c <= 3.2

    def test_c_good_validates_geometry(self):
        prob = zero_problem(n=64, side=1.0)
        with pytest.raises(ValueError):
            c_good_statistic(prob, (0.5, 0.5), 0.4)  # B_2r leaves the window

    def test_geodesic_tube_area(self):
        s = 0.1
        shape = (32, 32)
        geo = [(16, j) for j in range(32)]        # horizontal line
        target = [(16, 31)]
        area = geodesic_tube_area(s, shape, geo, target, 0.25)
        # vertices within 0.25 of both the line and the endpoint: a half
        # disk of radius 2.5 lattice steps around (16, 31), 13 vertices
        count = area / s ** 2
        assert count == 13
        with pytest.raises(ValueError):
            geodesic_tube_area(s, shape, [], target, 0.25)


class TestGraphConstruction:
    def test_rectangular_shapes_supported(self):
        w = np.ones((3, 5))
        g, ids, _ = build_lattice_graph(np.ones((3, 5), dtype=bool), w, 1.0, EDGE_WEIGHTED)
        assert g.shape == (15, 15)
        assert ids.max() == 14

    def test_unknown_convention_rejected(self):
        with pytest.raises(ValueError):
            build_lattice_graph(np.ones((3, 3), dtype=bool), np.ones((3, 3)), 1.0, "bogus")
        spec = GridSpec(n=8, spacing=0.1)
        mf = from_values(spec, np.zeros((8, 8)), 0.1)
        with pytest.raises(ValueError):
            MetricProblem(mf, PARAMS, "bogus")

    def test_nonpositive_weights_rejected(self):
        spec = GridSpec(n=8, spacing=0.1)
        vals = np.zeros((8, 8))
        vals[0, 0] = 2000.0  # overflows exp into inf
        mf = from_values(spec, vals, 0.1)
        with np.errstate(over="ignore"), pytest.raises(ValueError):
            MetricProblem(mf, PARAMS, EDGE_WEIGHTED)
