import math

import numpy as np
import pytest

from fraclab import (
    HomogenizeFailure,
    NotFoundError,
    PreconditionError,
    check_ssc,
    detect_exact_overlaps,
    greedy_ssc_subsystem,
    homogenize,
    iterate,
    product_ifs,
    project_ifs,
    remove_words,
    similarity_dimension,
)
from fraclab.subsystem import commensurable_exponents
from fraclab.errors import UnsupportedError
from fraclab import Ifs

from conftest import homogeneous


class TestIterate:
    def test_cantor_square(self, cantor):
        it = iterate(cantor, 2)
        assert it.q == 4
        assert np.allclose(it.ratios, 1 / 9)
        assert np.allclose(sorted(it.translations[:, 0]), [0, 2 / 9, 2 / 3, 8 / 9])

    def test_identity(self, cantor):
        assert iterate(cantor, 1) is cantor

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_dimension_invariant(self, corner, n):
        assert math.isclose(similarity_dimension(iterate(corner, n)), similarity_dimension(corner),
                            rel_tol=1e-9)

    def test_provenance(self, cantor):
        assert iterate(cantor, 2).provenance == ((1, 1), (1, 2), (2, 1), (2, 2))

    def test_bad_n(self, cantor):
        with pytest.raises(PreconditionError):
            iterate(cantor, 0)


class TestRemoveWords:
    def test_one_of_four(self, cantor):
        sub = remove_words(iterate(cantor, 2), [(2, 2)])
        assert sub.q == 3
        assert math.isclose(similarity_dimension(sub), math.log(3) / math.log(9), rel_tol=1e-9)

    def test_none(self, cantor):
        it = iterate(cantor, 2)
        assert remove_words(it, []) is it

    @pytest.mark.parametrize("k", [1, 2, 3, 5])
    def test_closed_form(self, corner, k):
        it = iterate(corner, 2)
        sub = remove_words(it, list(it.provenance)[:k])
        expected = math.log(9 - k) / (2 * math.log(3))
        assert math.isclose(similarity_dimension(sub), expected, rel_tol=1e-9)

    def test_unknown_word(self, cantor):
        with pytest.raises(NotFoundError):
            remove_words(iterate(cantor, 2), [(3, 1)])

    def test_remove_all(self, cantor):
        with pytest.raises(PreconditionError):
            remove_words(cantor, [(1,), (2,)])


class TestHomogenize:
    def test_cantor_unchanged(self, cantor):
        assert homogenize(cantor, 0.01) is cantor

    def test_iterate_minus_one(self, cantor):
        sub = remove_words(iterate(cantor, 2), [(1, 1)])
        assert homogenize(sub, 0.01) is sub

    def test_overlapping(self, overlapping):
        s = similarity_dimension(overlapping)
        out = homogenize(overlapping, 0.3, max_depth=14)
        assert out.is_homogeneous
        assert check_ssc(out).proved
        assert similarity_dimension(out) > min(s, 1.0) - 0.3

    def test_inhomogeneous_commensurable(self):
        ifs = Ifs.from_arrays([0.5, 0.25, 0.25], [[0.0], [0.5], [0.75]])
        out = homogenize(ifs, 0.2, max_depth=10)
        assert out.is_homogeneous and check_ssc(out).proved
        assert similarity_dimension(out) > 1.0 - 0.2 - 1e-9

    def test_failure_carries_best(self, overlapping):
        with pytest.raises(HomogenizeFailure) as info:
            homogenize(overlapping, 1e-6, max_depth=3)
        assert info.value.best_dimension <= info.value.target

    def test_incommensurable(self):
        ifs = Ifs.from_arrays([0.5, 1 / math.pi], [[0.0], [0.6]])
        with pytest.raises(UnsupportedError):
            commensurable_exponents(ifs)

    def test_bad_epsilon(self, cantor):
        with pytest.raises(PreconditionError):
            homogenize(cantor, 0.0)


class TestOverlaps:
    def test_duplicate(self, duplicate):
        assert detect_exact_overlaps(duplicate, 1) == [((1,), (2,))]

    @pytest.mark.parametrize("depth", [1, 2, 3, 4])
    def test_cantor_none(self, cantor, depth):
        assert detect_exact_overlaps(cantor, depth) == []

    def test_diagonal_projection(self, cantor):
        proj = project_ifs(product_ifs([cantor, cantor]), [1, 1])
        pairs = detect_exact_overlaps(proj, 1)
        assert pairs == [((2,), (3,))]

    def test_coordinate_projection(self, cantor):
        proj = project_ifs(product_ifs([cantor, cantor]), [1, 0])
        assert detect_exact_overlaps(proj, 1) == [((1,), (2,)), ((3,), (4,))]


class TestGreedy:
    def test_cantor_all(self, cantor):
        assert greedy_ssc_subsystem(cantor, 2).q == 4

    def test_touching(self, touching):
        sub = greedy_ssc_subsystem(touching, 2)
        assert sub.q < 4
        assert check_ssc(sub).proved

    def test_disjoint_balls(self, overlapping):
        sub = greedy_ssc_subsystem(overlapping, 5)
        from fraclab import bounding_ball
        c, R = bounding_ball(overlapping)
        centers = sub.translations + sub.ratios[:, None] * c
        radii = sub.ratios * R
        d = np.abs(centers[:, None, 0] - centers[None, :, 0])
        off = ~np.eye(sub.q, dtype=bool)
        assert np.all(d[off] > (radii[:, None] + radii[None, :])[off])

    def test_needs_homogeneous(self):
        with pytest.raises(PreconditionError):
            greedy_ssc_subsystem(Ifs.from_arrays([0.5, 0.25], [[0.0], [0.75]]), 2)
