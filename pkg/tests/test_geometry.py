import math

import numpy as np
import pytest

from fraclab import (
    ConeOutcome,
    DoubleCone,
    PreconditionError,
    affine_dimension,
    bounding_ball,
    collinearity_check,
    cone_contains,
    cone_intersect_test,
    detect_exact_overlaps,
    level_cover,
    project_ifs_plane,
    separation_spectrum,
    two_to_one_direction,
)
from fraclab.geometry import canonical_sign

from conftest import homogeneous

# a normal for which the five-corner example has a positive lower bound by depth 3
SPECTRUM_NORMAL = np.array([0.66, -0.57, 0.5])


@pytest.fixture
def flat_square():
    t = [[a, b, 0] for a in (0, 2 / 3) for b in (0, 2 / 3)]
    return homogeneous(1 / 3, t)


class TestConeContains:
    cone = DoubleCone((0, 0, 0), (0, 0, 1), math.pi / 4)

    def test_axis(self):
        assert cone_contains(self.cone, (0, 0, 1))

    def test_opposite_nappe(self):
        assert cone_contains(self.cone, (0, 0, -3))

    def test_perpendicular(self):
        assert not cone_contains(self.cone, (1, 0, 0))

    def test_boundary(self):
        assert cone_contains(self.cone, (1, 0, 1))

    def test_vertex(self):
        with pytest.raises(PreconditionError):
            cone_contains(self.cone, (0, 0, 0))

    def test_bad_angle(self):
        with pytest.raises(PreconditionError):
            DoubleCone((0, 0, 0), (0, 0, 1), math.pi / 2)


class TestAffine:
    def test_tetrahedron(self):
        P = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
        assert affine_dimension(P) == 3

    def test_two_points(self):
        assert affine_dimension([[0, 1, 2], [3, 4, 5]]) == 1

    def test_single_point(self):
        assert affine_dimension([[1, 2, 3]]) == 0

    def test_five_corner_centers(self, five_corners):
        assert affine_dimension(level_cover(five_corners, 3).centers) == 3

    def test_collinear(self):
        assert collinearity_check([[0, 0, 0], [1, 1, 1], [2, 2, 2]])

    def test_not_collinear(self):
        assert not collinearity_check([[0, 0, 0], [1, 0, 0], [0, 1, 0]])

    def test_planar_input(self):
        assert collinearity_check([[0, 0], [1, 2], [2, 4]])

    def test_witness_and_third_center(self, five_corners):
        rep = separation_spectrum(five_corners, SPECTRUM_NORMAL, 4)
        x, y = rep.witness_points
        centers = level_cover(five_corners, 4).centers
        far = np.minimum(np.linalg.norm(centers - x, axis=1), np.linalg.norm(centers - y, axis=1)) > 1e-9
        hits = [collinearity_check([x, y, c]) for c in centers[far]]
        assert not any(hits)


class TestConeIntersect:
    def test_cube_nonempty(self, cube):
        cone = DoubleCone((0.5, 0.5, 0.5), (0, 0, 1), 0.3)
        res = cone_intersect_test(cube, cone, 0.4, 6)
        assert res.outcome is ConeOutcome.NONEMPTY_WITNESS
        assert res.word is not None

    def test_flat_square_empty(self, flat_square):
        cone = DoubleCone((0.5, 0.5, 1.0), (0, 0, 1), 0.2)
        res = cone_intersect_test(flat_square, cone, 2.0, 8)
        assert res.outcome is ConeOutcome.EMPTY_CERTIFIED

    def test_touching_undetermined(self, cube):
        # vertex on the cube's face: every refinement keeps a cell straddling the vertex
        cone = DoubleCone((0.5, 0.5, 1.0), (1, 0, 0), 0.2)
        res = cone_intersect_test(cube, cone, 0.3, 3, max_cells=10**5)
        assert res.outcome is not ConeOutcome.EMPTY_CERTIFIED

    def test_witness_ball_inside(self, cube):
        cone = DoubleCone((0.5, 0.5, 0.5), (1, 1, 0), 0.25)
        res = cone_intersect_test(cube, cone, 0.4, 6)
        assert res.outcome is ConeOutcome.NONEMPTY_WITNESS
        from fraclab import compose
        c, R = bounding_ball(cube)
        f = compose(cube, res.word)
        center = f(c)
        assert np.linalg.norm(center - 0.5) + f.ratio * R < 0.4

    def _spectrum_vertex(self, five_corners, depth=4):
        rep = separation_spectrum(five_corners, SPECTRUM_NORMAL, depth)
        return rep, rep.witness_points[0], (rep.witness_words[0], 1)

    def test_vertex_on_attractor_empty(self, five_corners):
        rep, v, address = self._spectrum_vertex(five_corners)
        cone = DoubleCone(v, SPECTRUM_NORMAL, 0.99 * math.asin(rep.sin_eps_lower))
        _, R = bounding_ball(five_corners)
        res = cone_intersect_test(five_corners, cone, 2 * R, 12, vertex_address=address)
        assert res.outcome is ConeOutcome.EMPTY_CERTIFIED

    def test_vertex_on_attractor_nonempty(self, five_corners):
        rep, v, address = self._spectrum_vertex(five_corners)
        alpha = 1.5 * math.asin(rep.sin_eps_upper)
        cone = DoubleCone(v, SPECTRUM_NORMAL, alpha)
        _, R = bounding_ball(five_corners)
        res = cone_intersect_test(five_corners, cone, 2 * R, 12, vertex_address=address)
        assert res.outcome is ConeOutcome.NONEMPTY_WITNESS
        # the witness cylinder lies inside the open truncated cone
        from fraclab import compose
        c, _ = bounding_ball(five_corners)
        f = compose(five_corners, res.word)
        d = f(c) - np.asarray(v)
        D = np.linalg.norm(d)
        theta = math.acos(min(1.0, abs(d @ cone.axis) / D))
        assert D + f.ratio * R < 2 * R
        assert theta + math.asin(f.ratio * R / D) < alpha

    def test_wrong_address(self, five_corners):
        cone = DoubleCone((0.1, 0.1, 0.1), (0, 0, 1), 0.1)
        with pytest.raises(PreconditionError, match="address"):
            cone_intersect_test(five_corners, cone, 1.0, 4, vertex_address=((1,), 2))


class TestSeparationSpectrum:
    def test_monotone_and_bracketing(self, five_corners):
        reps = [separation_spectrum(five_corners, SPECTRUM_NORMAL, d) for d in range(2, 6)]
        for rep in reps:
            assert rep.sin_eps_lower <= rep.witness_value + 1e-9
            assert abs(rep.witness_value - rep.sin_eps_upper) <= 1e-9
            assert rep.separated
        for a, b in zip(reps, reps[1:]):
            assert b.sin_eps_upper <= a.sin_eps_upper
            assert b.sin_eps_lower >= a.sin_eps_lower

    def test_positive_lower_at_depth_four(self, five_corners):
        assert separation_spectrum(five_corners, SPECTRUM_NORMAL, 4).sin_eps_lower > 0

    def test_frozen_values(self, five_corners):
        # frozen from an independent run; the upper bound is attained by attractor points
        rep = separation_spectrum(five_corners, SPECTRUM_NORMAL, 4)
        assert rep.witness_words == ((3, 5, 5, 5), (5, 1, 2, 1))
        assert math.isclose(rep.sin_eps_upper, 0.07750749303220074, rel_tol=1e-9)
        assert math.isclose(rep.sin_eps_lower, 0.03543056879526789, rel_tol=1e-9)

    def test_planar_in_plane_direction(self, flat_square):
        rep = separation_spectrum(flat_square, [1, 0, 0], 3)
        assert rep.sin_eps_upper == 0.0 and rep.sin_eps_lower == 0.0

    def test_planar_normal_direction(self, flat_square):
        rep = separation_spectrum(flat_square, [0, 0, 1], 3)
        assert math.isclose(rep.sin_eps_upper, 1.0)

    def test_block_size_irrelevant(self, five_corners):
        a = separation_spectrum(five_corners, SPECTRUM_NORMAL, 3)
        b = separation_spectrum(five_corners, SPECTRUM_NORMAL, 3, block=7)
        assert a.to_dict() == b.to_dict()

    def test_needs_r3(self, corner):
        with pytest.raises(PreconditionError):
            separation_spectrum(corner, [1, 0], 2)


class TestTwoToOne:
    def test_symmetric_pair(self):
        ifs = homogeneous(1 / 3, [[0, 0, 0], [2 / 3, 0, 0]])
        u = two_to_one_direction(ifs, [0.6, 0.8, 0], 2)
        assert np.allclose(u, [1, 0, 0])
        proj = project_ifs_plane(ifs, u)
        assert detect_exact_overlaps(proj, 1) == [((1,), (2,))]

    def test_sign_canonical(self):
        assert np.allclose(canonical_sign([-1, 2, 0]), [1, -2, 0])
        assert np.allclose(canonical_sign([0, -1e-14, -3]), [0, 1e-14, 3])

    def test_witness_images_merge(self, five_corners):
        rep = separation_spectrum(five_corners, SPECTRUM_NORMAL, 3)
        u = two_to_one_direction(five_corners, SPECTRUM_NORMAL, 3, report=rep)
        x, y = (np.asarray(p) for p in rep.witness_points)
        assert np.linalg.norm(np.cross(u, x - y)) < 1e-12

    def test_cube_overlaps(self, cube_cantor):
        u = two_to_one_direction(cube_cantor, [0, 0, 1], 2)
        assert detect_exact_overlaps(project_ifs_plane(cube_cantor, u), 1)

    def test_generic_direction_no_overlap(self, cube_cantor):
        proj = project_ifs_plane(cube_cantor, [0.31, 0.52, 0.79])
        assert detect_exact_overlaps(proj, 2) == []


@pytest.fixture
def cube_cantor():
    t = [[a, b, c] for a in (0, 2 / 3) for b in (0, 2 / 3) for c in (0, 2 / 3)]
    return homogeneous(1 / 3, t)
