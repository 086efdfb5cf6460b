import math

import numpy as np
import pytest

from fraclab import (
    DomainError,
    PreconditionError,
    ResourceError,
    SmoothMap,
    WeightedCloud,
    algebraic_product,
    angle_coordinate,
    curvy_check,
    distance_from,
    distance_set,
    geodesic_project,
    iterate,
    level_cover,
    linear,
    map_image,
    orthogonal_project_cloud,
    poly,
    product2,
    product3,
    product_ifs,
    project_ifs,
    radial_project,
    sample_cloud,
    tmain_condition_check,
)
from fraclab.maps import plane_basis

from conftest import homogeneous


def cloud(points, resolution=0.0):
    points = np.asarray(points, dtype=float)
    return WeightedCloud(points, np.ones(len(points)), resolution)


def cover_cloud(ifs, depth):
    cov = level_cover(ifs, depth)
    return WeightedCloud(cov.centers, cov.weights, float(cov.radii.max()))


class TestSmoothMap:
    def test_descriptor_round_trip(self):
        for g in (product2(), product3(), distance_from([1, 2, 3]), linear([1, 1]),
                  poly([[2.0, [1, 2]], [-1.0, [0, 1]]])):
            h = SmoothMap.from_descriptor(g.descriptor())
            X = np.random.default_rng(0).uniform(0.5, 2, size=(5, g.dim))
            assert np.allclose(h.value(X), g.value(X))

    def test_unknown_kind(self):
        with pytest.raises(PreconditionError):
            SmoothMap.from_descriptor({"kind": "sine"})

    def test_dimension_checked(self):
        with pytest.raises(PreconditionError, match="2-dimensional points, got 3"):
            product2().value(np.ones((2, 3)))

    def test_product3_value(self):
        assert product3().value([[1, 2, 3]])[0] == 6.0

    def test_distance_on_sphere(self):
        P = np.random.default_rng(1).normal(size=(20, 3))
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        assert np.allclose(distance_from([0, 0, 0]).value(P), 1.0)

    def test_poly_mixed_arity(self):
        with pytest.raises(PreconditionError):
            poly([[1, [1]], [1, [1, 1]]])


class TestOrthogonal:
    def test_axis(self):
        assert orthogonal_project_cloud(cloud([[3, 4]]), [1, 0]).values[0] == 3.0

    def test_oblique(self):
        assert math.isclose(orthogonal_project_cloud(cloud([[3, 4]]), [0.6, 0.8]).values[0], 5.0)

    def test_mirror(self):
        c = cloud(np.random.default_rng(2).normal(size=(10, 2)))
        a = orthogonal_project_cloud(c, [1, 2]).values
        b = orthogonal_project_cloud(c, [-1, -2]).values
        assert np.allclose(a, -b)

    def test_project_ifs_axis(self, corner):
        p = project_ifs(corner, [0, 1])
        assert np.allclose(p.translations[:, 0], corner.translations[:, 1])

    def test_commutes_with_iterate(self, corner):
        n = np.array([0.3, 0.7])
        a = project_ifs(iterate(corner, 2), n)
        b = iterate(project_ifs(corner, n), 2)
        assert np.allclose(np.sort(a.translations[:, 0]), np.sort(b.translations[:, 0]))

    def test_plane_basis_orthonormal(self):
        B = plane_basis([1, 2, 3])
        assert np.allclose(B @ B.T, np.eye(2))
        assert np.allclose(B @ (np.array([1, 2, 3]) / math.sqrt(14)), 0)


class TestRadial:
    def test_point(self):
        assert np.allclose(radial_project(cloud([[3, 4]])).points, [[0.6, 0.8]])

    def test_ray(self):
        out = radial_project(cloud([[1, 2, 2], [2, 4, 4], [0.5, 1, 1]]))
        assert np.allclose(out.points, out.points[0])

    def test_octant(self):
        P = np.random.default_rng(3).uniform(1, 5, size=(50, 3))
        assert np.all(radial_project(cloud(P)).points > 0)

    def test_origin_domain_error(self):
        with pytest.raises(DomainError):
            radial_project(cloud([[0, 0], [1, 1]]))

    def test_resolution_reaching_origin(self):
        with pytest.raises(DomainError):
            radial_project(cloud([[0.1, 0]], resolution=0.2))

    def test_resolution_scaled(self):
        out = radial_project(cloud([[2, 0], [0, 3]], resolution=0.5))
        assert math.isclose(out.resolution, 2 * 0.5 / 1.5)


class TestGeodesic:
    def test_axis(self):
        assert geodesic_project(cloud([[1, 0, 0]])).values[0] == 0.0

    def test_quarter(self):
        v = geodesic_project(cloud([[0, 1 / math.sqrt(2), 1 / math.sqrt(2)]])).values[0]
        assert math.isclose(v, math.pi / 2)

    def test_commutation(self):
        x = np.array([[1, 1, 1]]) / math.sqrt(3)
        a = geodesic_project(radial_project(cloud(x))).values
        b = angle_coordinate(radial_project(cloud(x[:, :2]))).values
        assert np.allclose(a, b)

    def test_pole(self):
        with pytest.raises(DomainError):
            geodesic_project(cloud([[0, 0, 1]]))


class TestImages:
    def test_product2_of_cantor_square(self, cantor):
        c = cover_cloud(product_ifs([cantor, cantor]), 5)
        v = map_image(product2(), c).values
        assert v.min() >= 0 and v.max() <= 1

    def test_map_resolution_lipschitz(self, cantor):
        c = cover_cloud(cantor, 4)
        img = map_image(poly([[1.0, [2]]]), c)
        assert math.isclose(img.resolution, c.resolution * 2 * c.values.max())


class TestDistanceSet:
    def test_unpinned_includes_zero(self):
        assert distance_set(cloud([[0.0], [1.0]])).values.tolist() == [0.0, 1.0]

    def test_pinned(self):
        assert sorted(distance_set(cloud([[1.0], [2.0]]), pin=[0.0]).values) == [1.0, 2.0]

    def test_pinned_cover(self, five_corners):
        coarse = cover_cloud(five_corners, 3)
        fine = level_cover(five_corners, 6).centers
        pin = np.array([1.5, 1.5, 1.5])
        d = distance_set(coarse, pin=pin)
        exact = np.linalg.norm(fine - pin, axis=1)
        gap = np.min(np.abs(exact[:, None] - d.values[None, :]), axis=1)
        assert np.all(gap <= d.resolution + 1e-12)

    def test_subsample_flag(self):
        c = cloud(np.arange(100, dtype=float)[:, None])
        out = distance_set(c, max_pairs=50)
        assert out.meta["subsampled"]

    def test_weights_sum(self, cantor):
        assert math.isclose(distance_set(cover_cloud(cantor, 5)).weights.sum(), 1.0)


class TestAlgebraicProduct:
    def test_small(self):
        out = algebraic_product([cloud([[2.0], [3.0]]), cloud([[5.0]])])
        assert sorted(out.values) == [10.0, 15.0]

    def test_zero(self):
        out = algebraic_product([cloud([[0.0]]), cloud([[1.0], [2.0], [3.0]])])
        assert out.values.tolist() == [0.0]

    def test_cantor_range(self, cantor):
        c = cover_cloud(cantor, 6)
        out = algebraic_product([c, c])
        assert out.values.min() >= 0 and out.values.max() <= 1

    def test_triple(self):
        out = algebraic_product([cloud([[2.0]]), cloud([[3.0]]), cloud([[4.0], [5.0]])])
        assert sorted(out.values) == [24.0, 30.0]

    def test_chunking_invariant(self, cantor):
        c = cover_cloud(cantor, 7)
        a = algebraic_product([c, c])
        b = algebraic_product([c, c], chunk=1000)
        assert np.array_equal(a.values, b.values) and np.allclose(a.weights, b.weights)

    def test_cap(self, cantor):
        c = cover_cloud(cantor, 6)
        with pytest.raises(ResourceError):
            algebraic_product([c, c], max_tuples=100)

    def test_covering(self, cantor):
        coarse = cover_cloud(cantor, 4)
        fine = level_cover(cantor, 8).centers[:, 0]
        out = algebraic_product([coarse, coarse])
        prods = np.multiply.outer(fine, fine).ravel()
        gap = np.min(np.abs(prods[:, None] - out.values[None, :]), axis=1)
        assert np.all(gap <= out.resolution + 1e-12)


class TestCurvy:
    def test_product2_positive(self, cantor):
        shifted = homogeneous(1 / 3, [[1, 1], [1 + 2 / 3, 1]])
        rep = curvy_check(product2(), cover_cloud(shifted, 5))
        assert rep.passed

    def test_product2_curvature_norm(self):
        X = np.array([[1.0, 2.0], [0.5, 3.0]])
        from fraclab.maps import curvature_vector
        assert np.allclose(np.linalg.norm(curvature_vector(product2(), X), axis=1),
                           np.hypot(X[:, 0], X[:, 1]))

    def test_linear_fails(self, corner):
        assert not curvy_check(linear([1, 1]), cover_cloud(corner, 4)).passed

    def test_distance_passes(self, corner):
        assert curvy_check(distance_from([-1, -1]), cover_cloud(corner, 4)).passed


class TestTmain:
    def positive_cube(self, depth=3):
        c = homogeneous(0.2, [0.2, 0.8])
        return cover_cloud(product_ifs([c, c, c]), depth)

    def test_product3(self):
        rep = tmain_condition_check(product3(), self.positive_cube())
        assert rep.gradient_ok and rep.cross_ok
        assert rep.max_normalized_cross <= 1e-10
        assert rep.lipschitz_min > 0 and rep.passed

    def test_linear_fails_bilipschitz(self):
        rep = tmain_condition_check(linear([1, 2, 3]), self.positive_cube())
        assert rep.lipschitz_min == 0.0 and not rep.bilipschitz_ok

    def test_distance_identity(self):
        rep = tmain_condition_check(distance_from([0, 0, 0]), self.positive_cube())
        assert math.isclose(rep.lipschitz_min, 1.0, rel_tol=1e-9)
        assert math.isclose(rep.lipschitz_max, 1.0, rel_tol=1e-9)

    def test_needs_three_dims(self, corner):
        with pytest.raises(PreconditionError):
            tmain_condition_check(product2(), cover_cloud(corner, 2))
