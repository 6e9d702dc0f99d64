import math

import numpy as np
import pytest

from spherecone.errors import ConfigurationError, DomainError
from spherecone.lds import SobolStream
from spherecone.spheremap import (RadialShells, SpacePoint, SpacePoints,
                                  cap_measure, equal_area_partition_s2,
                                  lift_to_space, map_to_sphere, radial_shells,
                                  stratified_sample)


class TestMapToSphere:
    def test_circle(self):
        np.testing.assert_allclose(map_to_sphere([0.0]), [1.0, 0.0],
                                   atol=1e-15)
        np.testing.assert_allclose(map_to_sphere([0.25]), [0.0, 1.0],
                                   atol=1e-15)
        np.testing.assert_allclose(map_to_sphere([0.5]), [-1.0, 0.0],
                                   atol=1e-15)

    def test_s2(self):
        np.testing.assert_allclose(map_to_sphere([0.0, 0.5]), [1, 0, 0],
                                   atol=1e-15)
        np.testing.assert_allclose(map_to_sphere([0.0, 0.0]), [0, 0, 1],
                                   atol=1e-15)
        np.testing.assert_allclose(map_to_sphere([0.25, 0.5]), [0, 1, 0],
                                   atol=1e-15)

    def test_s3(self):
        # the last cube coordinate becomes the final height: x_3 = 0.5
        # gives height 0, x_2 = 0 pins the previous height at 1
        np.testing.assert_allclose(map_to_sphere([0.0, 0.0, 0.5]),
                                   [0, 0, 1, 0], atol=1e-12)
        np.testing.assert_allclose(map_to_sphere([0.0, 0.5, 0.5]),
                                   [1, 0, 0, 0], atol=1e-12)

    def test_unit_norm_batch(self):
        rng = np.random.default_rng(0)
        for s in (1, 2, 5, 15):
            x = rng.random((200, s))
            y = map_to_sphere(x)
            assert y.shape == (200, s + 1)
            np.testing.assert_allclose(np.linalg.norm(y, axis=1), 1.0,
                                       atol=1e-12)

    def test_single_matches_batch(self):
        rng = np.random.default_rng(1)
        x = rng.random(4)
        np.testing.assert_array_equal(map_to_sphere(x),
                                      map_to_sphere(x[None, :])[0])

    def test_domain(self):
        with pytest.raises(DomainError):
            map_to_sphere([1.0, 0.2])
        with pytest.raises(DomainError):
            map_to_sphere([-0.1])

    def test_pushes_uniform_to_uniform_moments(self):
        # uniform cube input gives a uniform sphere distribution: each
        # coordinate has mean 0 and variance 1/(s+1)
        rng = np.random.default_rng(2)
        s = 4
        y = map_to_sphere(rng.random((200_000, s)))
        np.testing.assert_allclose(y.mean(axis=0), 0.0, atol=0.01)
        np.testing.assert_allclose((y**2).mean(axis=0), 1.0 / (s + 1),
                                   atol=0.01)

    def test_cap_mass_preserved(self):
        # empirical mass of a few caps against the closed form
        rng = np.random.default_rng(3)
        y = map_to_sphere(rng.random((200_000, 2)))
        for t in (-0.7, 0.0, 0.4, 0.9):
            z = rng.standard_normal(3)
            z /= np.linalg.norm(z)
            p = cap_measure(2, t)
            emp = float(np.mean(y @ z >= t))
            assert abs(emp - p) < 5.0 * math.sqrt(p * (1 - p) / 200_000)


class TestLift:
    def test_single_and_batch(self):
        pt = lift_to_space(np.array([0.25, 0.5]))
        assert isinstance(pt, SpacePoint)
        np.testing.assert_allclose(pt.direction, [0.0, 1.0], atol=1e-15)
        pts = lift_to_space(np.array([[0.25, 0.5], [0.0, 0.9]]))
        assert isinstance(pts, SpacePoints) and len(pts) == 2
        np.testing.assert_allclose(pts[0].cartesian, pt.cartesian)

    def test_radius_median(self):
        # u = 0.5 gives the chi(2) median sqrt(2 ln 2)
        pt = lift_to_space(np.array([0.1, 0.5]))
        assert pt.radius == pytest.approx(math.sqrt(2 * math.log(2)),
                                          rel=1e-12)

    def test_u_one_is_capped_not_infinite(self):
        pt = lift_to_space(np.array([0.1, 1.0 - 2.0**-40]))
        assert math.isfinite(pt.radius)

    def test_uniform_input_gives_standard_normal(self):
        rng = np.random.default_rng(4)
        d = 3
        x = lift_to_space(rng.random((400_000, d))).cartesian
        np.testing.assert_allclose(x.mean(axis=0), 0.0, atol=0.01)
        cov = np.cov(x.T)
        np.testing.assert_allclose(cov, np.eye(d), atol=0.01)
        # third moments vanish, fourth are 3
        np.testing.assert_allclose((x**3).mean(axis=0), 0.0, atol=0.03)
        np.testing.assert_allclose((x**4).mean(axis=0), 3.0, atol=0.06)

    def test_low_discrepancy_input(self):
        x = lift_to_space(SobolStream(5, seed=1, scramble=True).take(4096))
        assert len(x) == 4096
        np.testing.assert_allclose(x.cartesian.mean(axis=0), 0.0, atol=0.02)

    def test_needs_two_coordinates(self):
        with pytest.raises(DomainError):
            lift_to_space(np.array([0.5]))


class TestCapMeasure:
    def test_trivial(self):
        for m in (1, 2, 3, 15):
            assert cap_measure(m, -1.0) == pytest.approx(1.0)
            assert cap_measure(m, 1.0) == pytest.approx(0.0, abs=1e-15)
            assert cap_measure(m, 0.0) == pytest.approx(0.5)

    def test_circle_closed_form(self):
        # on S^1 the cap is an arc: measure arccos(t) / pi
        for t in (-0.5, 0.2, 0.8):
            assert cap_measure(1, t) == pytest.approx(
                math.acos(t) / math.pi, rel=1e-12)

    def test_s2_closed_form(self):
        # on S^2 the cap mass is (1 - t) / 2
        for t in (-0.3, 0.0, 0.6):
            assert cap_measure(2, t) == pytest.approx((1 - t) / 2, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            cap_measure(2, 1.5)
        with pytest.raises(DomainError):
            cap_measure(0, 0.5)


class TestRadialShells:
    def test_equal_masses(self):
        shells = radial_shells(1.5, 3.0, 8)
        assert shells.boundaries.shape == (7,)
        assert np.all(np.diff(shells.boundaries) > 0)
        for k in range(1, 9):
            assert shells.shell_mass(k) == pytest.approx(1 / 8, rel=1e-12)

    def test_single_shell(self):
        shells = radial_shells(2.0, 1.0, 1)
        assert shells.boundaries.size == 0
        assert shells.shell_mass(1) == pytest.approx(1.0)

    def test_sample_radius_within_shell(self):
        shells = radial_shells(1.5, 3.0, 5)
        rng = np.random.default_rng(5)
        for k in range(1, 6):
            r = shells.sample_radius(k, rng.random(100))
            lo = 0.0 if k == 1 else shells.boundaries[k - 2]
            hi = np.inf if k == 5 else shells.boundaries[k - 1]
            assert np.all(r >= lo) and np.all(r <= hi)

    def test_sample_radius_quantile(self):
        # u = 0 at shell 1 is the zero radius, u -> 1 at the boundary
        shells = radial_shells(1.0, 2.0, 4)
        assert shells.sample_radius(1, 0.0) == 0.0
        assert shells.sample_radius(2, 1.0) == pytest.approx(
            shells.boundaries[1], rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            radial_shells(0.0, 1.0, 4)
        with pytest.raises(DomainError):
            radial_shells(1.0, 1.0, 0)


class TestPartition:
    @pytest.mark.parametrize("M", [1, 2, 3, 10, 33, 100, 1000])
    def test_equal_areas(self, M):
        part = equal_area_partition_s2(M)
        assert part.M == M and part.cells.shape == (M, 4)
        areas = np.array([part.cell_area(i) for i in range(M)])
        np.testing.assert_allclose(areas, 1.0 / M, rtol=1e-9)

    @pytest.mark.parametrize("M", [1, 2, 5, 10, 100, 1000, 5000])
    def test_diameter_bound(self, M):
        part = equal_area_partition_s2(M)
        assert part.diameter_constant <= 7.0

    def test_bands_cover_cells(self, ):
        part = equal_area_partition_s2(57)
        assert sum(b[2] for b in part.bands) == 57

    def test_cells_tile_the_sphere(self):
        # random sphere points each land in exactly one cell
        part = equal_area_partition_s2(40)
        rng = np.random.default_rng(6)
        y = rng.standard_normal((500, 3))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        theta = np.arccos(np.clip(y[:, 2], -1, 1))
        phi = np.mod(np.arctan2(y[:, 1], y[:, 0]), 2 * np.pi)
        t0, t1, p0, p1 = part.cells.T
        hits = ((theta[:, None] >= t0) & (theta[:, None] < t1)
                & (phi[:, None] >= p0) & (phi[:, None] < p1))
        assert np.all(hits.sum(axis=1) == 1)

    def test_domain(self):
        with pytest.raises(DomainError):
            equal_area_partition_s2(0)


class TestStratifiedSample:
    def test_shapes_and_determinism(self):
        part = equal_area_partition_s2(12)
        shells = radial_shells(1.5, 3.0, 4)
        pts = stratified_sample(part, shells, rng_seed=9)
        assert len(pts) == 48
        pts2 = stratified_sample(part, shells, rng_seed=9)
        np.testing.assert_array_equal(pts.cartesian, pts2.cartesian)
        assert np.any(pts.cartesian
                      != stratified_sample(part, shells, 10).cartesian)

    def test_points_in_their_strata(self):
        part = equal_area_partition_s2(12)
        shells = radial_shells(1.5, 3.0, 4)
        pts = stratified_sample(part, shells, rng_seed=1)
        bounds = np.concatenate([[0.0], shells.boundaries, [np.inf]])
        for m in range(12):
            t0, t1, p0, p1 = part.cells[m]
            for k in range(4):
                d = pts.directions[m * 4 + k]
                r = pts.radii[m * 4 + k]
                theta = math.acos(min(max(d[2], -1), 1))
                phi = math.atan2(d[1], d[0]) % (2 * math.pi)
                assert t0 - 1e-9 <= theta <= t1 + 1e-9
                if p1 - p0 < 2 * math.pi - 1e-9:
                    assert p0 - 1e-9 <= phi <= p1 + 1e-9
                assert bounds[k] <= r <= bounds[k + 1]

    def test_directions_uniform_within_cell(self):
        # the full-sphere cell reduces to plain uniform sampling
        part = equal_area_partition_s2(1)
        shells = radial_shells(1.0, 2.0, 1)
        pts = SpacePoints(
            np.vstack([stratified_sample(part, shells, s).directions
                       for s in range(4000)]),
            np.ones(4000))
        np.testing.assert_allclose(pts.directions.mean(axis=0), 0.0,
                                   atol=0.03)


class TestSpacePointTypes:
    def test_validation(self):
        with pytest.raises(DomainError):
            SpacePoint(np.array([1.0, 1.0]), 1.0)
        with pytest.raises(DomainError):
            SpacePoint(np.array([1.0, 0.0]), -0.5)
        with pytest.raises(ConfigurationError):
            SpacePoints(np.eye(3), [1.0, 2.0])

    def test_from_cartesian_roundtrip(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((20, 4))
        pts = SpacePoints.from_cartesian(x)
        np.testing.assert_allclose(pts.cartesian, x, atol=1e-12)

    def test_origin_gets_default_direction(self):
        pts = SpacePoints.from_cartesian(np.zeros((1, 3)))
        assert pts.radii[0] == 0.0
        np.testing.assert_array_equal(pts.directions[0], [1.0, 0.0, 0.0])
