import math

import numpy as np
import pytest

from lfpp.field import (
    GridSpec,
    LatticeField,
    DETERMINISTIC,
    add_function,
    bilinear,
    circle_average,
    circle_average_trace,
    dirichlet_green_diagonal,
    log_singularity,
    rescale_field,
    sample_function,
    sample_whole_plane_gff,
    sample_zero_boundary_gff,
)
from lfpp.seeds import replica_seed


def centered_spec(n, side):
    s = side / (n - 1)
    half = (n - 1) * s / 2.0
    return GridSpec(n=n, spacing=s, origin=(-half, -half))


class TestGridSpec:
    def test_rejects_non_power_of_two(self):
        for bad in (0, 4, 7, 12, 100):
            with pytest.raises(ValueError):
                GridSpec(n=bad, spacing=0.1)

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            GridSpec(n=16, spacing=0.0)

    def test_side_center_axis(self):
        spec = GridSpec(n=16, spacing=0.5, origin=(1.0, -2.0))
        assert spec.side == pytest.approx(7.5)
        assert spec.center == (pytest.approx(4.75), pytest.approx(1.75))
        ax = spec.axis()
        assert ax[0] == 1.0 and ax[-1] == pytest.approx(8.5)
        xx, yy = spec.mesh()
        assert xx[3, 0] == pytest.approx(1.0 + 3 * 0.5)
        assert yy[0, 3] == pytest.approx(-2.0 + 3 * 0.5)

    def test_containment(self):
        spec = GridSpec(n=16, spacing=0.1, origin=(0.0, 0.0))
        assert spec.contains_point((1.0, 1.0))
        assert not spec.contains_point((2.0, 0.0))
        assert spec.contains_disk((0.75, 0.75), 0.5)
        assert not spec.contains_disk((0.75, 0.75), 0.8)


class TestLatticeField:
    def test_shape_mismatch_rejected(self):
        spec = GridSpec(n=8, spacing=0.1)
        with pytest.raises(ValueError):
            LatticeField(spec=spec, values=np.zeros((4, 4)), kind=DETERMINISTIC)

    def test_non_finite_rejected(self):
        spec = GridSpec(n=8, spacing=0.1)
        vals = np.zeros((8, 8))
        vals[2, 3] = np.nan
        with pytest.raises(ValueError):
            LatticeField(spec=spec, values=vals, kind=DETERMINISTIC)

    def test_values_read_only(self):
        spec = GridSpec(n=8, spacing=0.1)
        f = LatticeField(spec=spec, values=np.zeros((8, 8)), kind=DETERMINISTIC)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_unknown_kind_rejected(self):
        spec = GridSpec(n=8, spacing=0.1)
        with pytest.raises(ValueError):
            LatticeField(spec=spec, values=np.zeros((8, 8)), kind="bogus")


class TestZeroBoundarySampler:
    def test_boundary_exactly_zero(self):
        spec = GridSpec(n=32, spacing=1.0 / 31)
        f = sample_zero_boundary_gff(spec, 7)
        assert np.all(f.values[0, :] == 0.0)
        assert np.all(f.values[-1, :] == 0.0)
        assert np.all(f.values[:, 0] == 0.0)
        assert np.all(f.values[:, -1] == 0.0)

    def test_deterministic_given_seed(self):
        spec = GridSpec(n=32, spacing=1.0 / 31)
        a = sample_zero_boundary_gff(spec, 11)
        b = sample_zero_boundary_gff(spec, 11)
        c = sample_zero_boundary_gff(spec, 12)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_pointwise_variance_matches_eigensum(self):
        # empirical variance at an interior vertex against the direct
        # eigen-sum for the covariance diagonal, an independent computation
        spec = GridSpec(n=16, spacing=1.0 / 15)
        idx = (8, 8)
        target = dirichlet_green_diagonal(spec, idx)
        reps = 4000
        vals = np.array([
            sample_zero_boundary_gff(spec, 10_000 + k).values[idx] for k in range(reps)
        ])
        assert vals.var(ddof=1) == pytest.approx(target, rel=0.1)

    def test_green_diagonal_rejects_boundary(self):
        spec = GridSpec(n=16, spacing=1.0 / 15)
        with pytest.raises(ValueError):
            dirichlet_green_diagonal(spec, (0, 5))


class TestWholePlaneSampler:
    def test_unit_circle_average_recentered_to_zero(self):
        spec = centered_spec(128, 2.5)
        f = sample_whole_plane_gff(spec, 3)
        assert abs(circle_average(f, spec.center, 1.0)) < 1e-10

    def test_window_must_contain_unit_disk(self):
        spec = centered_spec(64, 1.5)
        with pytest.raises(ValueError):
            sample_whole_plane_gff(spec, 0)

    def test_deterministic_given_seed(self):
        spec = centered_spec(64, 2.5)
        a = sample_whole_plane_gff(spec, 5)
        b = sample_whole_plane_gff(spec, 5)
        assert np.array_equal(a.values, b.values)


class TestBilinear:
    def test_reproduces_bilinear_functions_exactly(self):
        spec = GridSpec(n=16, spacing=0.25, origin=(-1.0, 2.0))
        xx, yy = spec.mesh()
        vals = 2.0 + 3.0 * xx - yy + 0.5 * xx * yy
        f = LatticeField(spec=spec, values=vals, kind=DETERMINISTIC)
        rng = np.random.default_rng(0)
        pts = np.stack([
            rng.uniform(-1.0, -1.0 + spec.side, 50),
            rng.uniform(2.0, 2.0 + spec.side, 50),
        ], axis=1)
        expect = 2.0 + 3.0 * pts[:, 0] - pts[:, 1] + 0.5 * pts[:, 0] * pts[:, 1]
        np.testing.assert_allclose(bilinear(f, pts), expect, rtol=1e-12, atol=1e-12)

    def test_rejects_outside_window(self):
        spec = GridSpec(n=16, spacing=0.25)
        f = LatticeField(spec=spec, values=np.zeros((16, 16)), kind=DETERMINISTIC)
        with pytest.raises(ValueError):
            bilinear(f, np.array([[50.0, 0.0]]))


class TestCircleAverage:
    def test_constant_field(self):
        spec = centered_spec(64, 2.0)
        f = LatticeField(spec=spec, values=np.full((64, 64), 3.25), kind=DETERMINISTIC)
        assert circle_average(f, (0.0, 0.0), 0.5) == pytest.approx(3.25, abs=1e-12)

    def test_linear_field_averages_to_center_value(self):
        spec = centered_spec(64, 2.0)
        xx, yy = spec.mesh()
        f = LatticeField(spec=spec, values=1.0 + 2.0 * xx - 0.5 * yy, kind=DETERMINISTIC)
        assert circle_average(f, (0.1, -0.2), 0.5) == pytest.approx(1.0 + 0.2 + 0.1, abs=1e-9)

    def test_under_resolved_radius_rejected(self):
        spec = centered_spec(64, 2.0)
        f = LatticeField(spec=spec, values=np.zeros((64, 64)), kind=DETERMINISTIC)
        with pytest.raises(ValueError):
            circle_average(f, (0.0, 0.0), spec.spacing)

    def test_circle_leaving_window_rejected(self):
        spec = centered_spec(64, 2.0)
        f = LatticeField(spec=spec, values=np.zeros((64, 64)), kind=DETERMINISTIC)
        with pytest.raises(ValueError):
            circle_average(f, (0.9, 0.0), 0.5)

    def test_trace_columns(self):
        spec = centered_spec(64, 4.0)
        f = LatticeField(spec=spec, values=np.zeros((64, 64)), kind=DETERMINISTIC)
        rows = circle_average_trace(f, (0.0, 0.0), np.array([1.0, 0.5]))
        assert rows.shape == (2, 3)
        assert rows[0, 0] == pytest.approx(0.0)          # t = log(1/r)
        assert rows[1, 0] == pytest.approx(math.log(2.0))
        assert rows[1, 2] == pytest.approx(0.5)


class TestRescale:
    def test_values_and_recentering(self):
        spec = centered_spec(128, 4.2)
        h = sample_whole_plane_gff(spec, 9)
        out = rescale_field(h, 2)
        assert out.spec.n == 64
        assert out.spec.spacing == spec.spacing
        assert out.spec.origin[0] == pytest.approx(spec.origin[0] / 2)
        np.testing.assert_array_equal(
            out.values, h.values[::2, ::2] - out.recentering
        )
        # the rescaled field's own unit-circle average about the origin is 0
        assert abs(circle_average(out, (0.0, 0.0), 1.0)) < 1e-10

    def test_non_power_of_two_factor_rejected(self):
        spec = centered_spec(128, 4.2)
        h = sample_whole_plane_gff(spec, 9)
        with pytest.raises(ValueError):
            rescale_field(h, 3)


class TestFunctionHelpers:
    def test_sample_function(self):
        spec = GridSpec(n=8, spacing=1.0)
        vals = sample_function(spec, lambda x, y: x + 10.0 * y)
        assert vals[2, 3] == pytest.approx(2.0 + 30.0)

    def test_add_function_shape_mismatch(self):
        spec = GridSpec(n=8, spacing=1.0)
        f = LatticeField(spec=spec, values=np.zeros((8, 8)), kind=DETERMINISTIC)
        with pytest.raises(ValueError):
            add_function(f, np.zeros((4, 4)))

    def test_log_singularity_clamped(self):
        spec = GridSpec(n=16, spacing=0.1, origin=(0.0, 0.0))
        vals = log_singularity(spec, 1.5, (0.5, 0.5))
        at_center = vals[5, 5]
        assert at_center == pytest.approx(-1.5 * math.log(0.05))
        assert np.all(np.isfinite(vals))
        assert vals.max() == at_center


class TestSeeds:
    def test_replica_seed_deterministic_and_distinct(self):
        a = replica_seed(42, 0)
        assert a == replica_seed(42, 0)
        assert a != replica_seed(42, 1)
        assert replica_seed(42, 1, 2) != replica_seed(42, 1, 3)
