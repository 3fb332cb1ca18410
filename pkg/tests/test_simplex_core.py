"""Геометрія Ейчісона та перетворення alr/clr/ilr."""

import numpy as np
import pytest

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.simplex_core import (
    SimplexPoint,
    aitchison_dist,
    aitchison_inner,
    aitchison_inner_pairwise,
    aitchison_norm,
    alr,
    closure,
    closure_rows,
    clr,
    ilr,
    ilr_rows,
    inv_alr,
    inv_clr,
    inv_ilr,
    inv_ilr_rows,
    inverse,
    perturb,
    perturb_diff,
    pivot_contrast_matrix,
    power,
)

DIMS = list(range(2, 11))


class TestSimplexPoint:
    def test_closure_of_raw_vector(self):
        np.testing.assert_allclose(closure([1.0, 2.0, 3.0]).parts, [1 / 6, 2 / 6, 3 / 6], atol=1e-15)

    def test_closed_input_kept_verbatim(self):
        parts = [0.2, 0.3, 0.5]
        assert SimplexPoint(parts).to_list() == parts

    def test_unclosed_input_is_closed(self):
        np.testing.assert_allclose(SimplexPoint([0.2, 0.3, 0.6]).parts, [2 / 11, 3 / 11, 6 / 11], atol=1e-15)

    def test_rejects_zero_part(self):
        with pytest.raises(SmoothingException) as e:
            SimplexPoint([0.2, 0.0, 0.8])
        assert e.value.error_code == SmoothingErrorCode.NON_POSITIVE_PART

    def test_rejects_single_part(self):
        with pytest.raises(SmoothingException) as e:
            SimplexPoint([1.0])
        assert e.value.error_code == SmoothingErrorCode.DIMENSION_TOO_SMALL

    def test_parts_are_read_only(self):
        x = SimplexPoint([0.2, 0.3, 0.5])
        with pytest.raises(ValueError):
            x.parts[0] = 0.9

    def test_neutral(self):
        np.testing.assert_allclose(SimplexPoint.neutral(4).parts, np.full(4, 0.25))


class TestGroupLaws:
    def test_neutral_element(self):
        x = SimplexPoint([0.1, 0.6, 0.3])
        np.testing.assert_allclose(perturb(x, SimplexPoint.neutral(3)).parts, x.parts, atol=1e-15)

    def test_difference_with_itself_is_neutral(self):
        x = SimplexPoint([0.1, 0.6, 0.3])
        np.testing.assert_allclose(perturb_diff(x, x).parts, np.full(3, 1 / 3), atol=1e-15)

    def test_inverse(self):
        x = SimplexPoint([0.1, 0.6, 0.3])
        np.testing.assert_allclose(perturb(x, inverse(x)).parts, np.full(3, 1 / 3), atol=1e-15)

    def test_power_zero_and_one(self):
        x = SimplexPoint([0.1, 0.6, 0.3])
        np.testing.assert_allclose(power(0.0, x).parts, np.full(3, 1 / 3), atol=1e-15)
        np.testing.assert_allclose(power(1.0, x).parts, x.parts, atol=1e-15)

    def test_large_power_stays_finite(self):
        x = SimplexPoint([0.1, 0.6, 0.3])
        y = power(1e4, x)
        assert np.all(np.isfinite(y.parts)) and np.all(y.parts > 0.0)
        assert y.parts.argmax() == 1

    @pytest.mark.parametrize("coords", [[800.0, -800.0], [1e3, 1e3], [-1e4, 0.0]])
    def test_extreme_coordinates_stay_inside(self, coords):
        for point in (inv_ilr(coords), inv_alr(coords)):
            assert np.all(point.parts > 0.0)
            assert point.parts.sum() == pytest.approx(1.0)
        assert np.all(inv_ilr_rows(np.array([coords])) > 0.0)
        assert np.all(inv_clr([1e4, -5e3, -5e3]).parts > 0.0)

    def test_products_below_double_range(self):
        x = SimplexPoint([1e-200, 0.5, 0.5])
        assert np.all(perturb(x, x).parts > 0.0)
        assert np.all(np.isfinite(inverse(power(1.5, x)).parts))

    def test_distributivity(self, random_parts):
        for x_parts, y_parts in zip(random_parts(4, 20), random_parts(4, 20)):
            x, y = SimplexPoint(x_parts), SimplexPoint(y_parts)
            left = power(2.5, perturb(x, y))
            right = perturb(power(2.5, x), power(2.5, y))
            np.testing.assert_allclose(left.parts, right.parts, rtol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(SmoothingException) as e:
            perturb(SimplexPoint([0.5, 0.5]), SimplexPoint([0.2, 0.3, 0.5]))
        assert e.value.error_code == SmoothingErrorCode.DIMENSION_MISMATCH


class TestMetric:
    def test_inner_product_forms_agree(self, random_parts):
        for x_parts, y_parts in zip(random_parts(5, 50), random_parts(5, 50)):
            x, y = SimplexPoint(x_parts), SimplexPoint(y_parts)
            assert aitchison_inner(x, y) == pytest.approx(aitchison_inner_pairwise(x, y), abs=1e-12)

    def test_norm_of_neutral_is_zero(self):
        assert aitchison_norm(SimplexPoint.neutral(3)) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("dim", DIMS)
    def test_ilr_is_isometry(self, random_parts, dim):
        xs, ys = random_parts(dim, 100), random_parts(dim, 100)
        for x_parts, y_parts in zip(xs, ys):
            x, y = SimplexPoint(x_parts), SimplexPoint(y_parts)
            gap = np.linalg.norm(ilr(x).coords - ilr(y).coords)
            assert abs(aitchison_dist(x, y) - gap) <= 1e-10


class TestTransforms:
    @pytest.mark.parametrize("dim", DIMS)
    def test_round_trips(self, random_parts, dim):
        for parts in random_parts(dim, 100):
            x = SimplexPoint(parts)
            np.testing.assert_allclose(inv_ilr(ilr(x)).parts, x.parts, atol=1e-12)
            np.testing.assert_allclose(inv_clr(clr(x)).parts, x.parts, atol=1e-12)
            np.testing.assert_allclose(inv_alr(alr(x)).parts, x.parts, atol=1e-12)

    def test_clr_sums_to_zero(self):
        assert clr(SimplexPoint([0.1, 0.2, 0.7])).sum() == pytest.approx(0.0, abs=1e-14)

    def test_inv_clr_outside_hyperplane(self):
        with pytest.raises(SmoothingException) as e:
            inv_clr([1.0, 1.0, 1.0])
        assert e.value.error_code == SmoothingErrorCode.NOT_IN_HYPERPLANE

    def test_pivot_coordinates_for_three_parts(self):
        x = SimplexPoint([0.2, 0.3, 0.5])
        expected = [
            np.sqrt(1 / 2) * np.log(0.2 / 0.3),
            np.sqrt(2 / 3) * np.log(np.sqrt(0.2 * 0.3) / 0.5),
        ]
        np.testing.assert_allclose(ilr(x).coords, expected, atol=1e-14)

    def test_neutral_maps_to_origin(self):
        np.testing.assert_allclose(ilr(SimplexPoint.neutral(5)).coords, np.zeros(4), atol=1e-15)

    def test_batch_forms_match_scalar(self, random_parts):
        parts = random_parts(4, 30)
        coords = ilr_rows(parts)
        for row, c in zip(parts, coords):
            np.testing.assert_allclose(ilr(SimplexPoint(row)).coords, c, atol=1e-14)
        np.testing.assert_allclose(inv_ilr_rows(coords), parts, atol=1e-12)
        np.testing.assert_allclose(closure_rows(parts * 7.0), parts, atol=1e-15)


class TestContrastMatrix:
    @pytest.mark.parametrize("dim", DIMS)
    def test_identities(self, dim):
        u = pivot_contrast_matrix(dim).entries
        np.testing.assert_allclose(u.T @ u, np.eye(dim - 1), atol=1e-12)
        np.testing.assert_allclose(u @ u.T, np.eye(dim) - np.full((dim, dim), 1.0 / dim), atol=1e-12)

    def test_dimension_too_small(self):
        with pytest.raises(SmoothingException) as e:
            pivot_contrast_matrix(1)
        assert e.value.error_code == SmoothingErrorCode.DIMENSION_TOO_SMALL
