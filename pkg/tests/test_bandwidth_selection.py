"""Розбиття на фолди, критерії крос-валідації та вибір h."""

import numpy as np
import pytest

from conftest import B_COMP, regression_sample
from system.bandwidth_selection import (
    MAD_CONSISTENCY,
    _argmin_small_h,
    cv_residuals,
    make_partition,
    mad_scale,
    partition_hash,
    refinement_grid,
    s_scale_dispersion,
    score_ls,
    score_robust,
    select_bandwidth,
    tau_scale,
)
from system.exceptions import SmoothingErrorCode, SmoothingException
from system.kernel_smoothing import Dataset, KernelSpec, fit_local_constant_ls
from system.mc_harness import generate_sample, ise, prediction_points, true_regression_rows
from system.models import CvConfig, CvCriterion, DirichletParams, Dispersion, ErrorLaw, EstimatorConfig, McScenario, Method
from system.robust_estimation import fit_estimator
from system.simplex_core import SimplexPoint, ilr_rows
from tools.rng import RngStream


class TestPartition:
    def test_folds_cover_indices(self):
        blocks = make_partition(23, 5, RngStream(1))
        assert sorted(len(b) for b in blocks) == [4, 4, 5, 5, 5]
        joined = np.concatenate(blocks)
        assert sorted(joined.tolist()) == list(range(23))

    def test_same_seed_same_partition(self):
        first = make_partition(40, 4, RngStream(9))
        second = make_partition(40, 4, RngStream(9))
        assert partition_hash(first) == partition_hash(second)
        assert partition_hash(first) != partition_hash(make_partition(40, 4, RngStream(10)))

    def test_leave_one_out(self):
        blocks = make_partition(6, "loo")
        assert [b.tolist() for b in blocks] == [[0], [1], [2], [3], [4], [5]]

    @pytest.mark.parametrize("folds", [1, 11])
    def test_fold_count_out_of_range(self, folds):
        with pytest.raises(SmoothingException) as e:
            make_partition(10, folds)
        assert e.value.error_code == SmoothingErrorCode.FOLD_TOO_SMALL


class TestScores:
    def test_least_squares_score(self):
        assert score_ls([1.0, -1.0, 2.0]) == pytest.approx(2.0)

    def test_robust_score_with_mad(self):
        assert score_robust([-1.0, 0.0, 1.0]) == pytest.approx(MAD_CONSISTENCY ** 2)

    def test_robust_score_symmetric_example(self):
        assert score_robust([-2.0, -1.0, 0.0, 1.0, 2.0]) == pytest.approx(2.198, abs=5e-4)

    def test_robust_score_includes_location(self):
        assert score_robust([2.0, 2.0, 2.0]) == pytest.approx(4.0)

    def test_single_outlier_barely_moves_robust_score(self, rng):
        residuals = rng.standard_normal(200)
        dirty = residuals.copy()
        dirty[0] = 1e6
        assert score_robust(dirty) == pytest.approx(score_robust(residuals), rel=0.05)
        assert score_ls(dirty) > 1e3 * score_ls(residuals)

    def test_scales_are_consistent_at_normal(self):
        z = np.random.default_rng(77).standard_normal(50_000)
        assert mad_scale(z) == pytest.approx(1.0, abs=0.03)
        assert tau_scale(z) == pytest.approx(1.0, abs=0.03)
        assert s_scale_dispersion(z) == pytest.approx(1.0, abs=0.03)

    def test_degenerate_dispersions(self):
        flat = np.full(10, 3.0)
        assert tau_scale(flat) == 0.0
        assert s_scale_dispersion(flat) == 0.0
        assert score_robust(flat, dispersion=Dispersion.TAU_SCALE) == pytest.approx(9.0)

    def test_empty_residuals(self):
        with pytest.raises(SmoothingException):
            score_ls([])


class TestCvResiduals:
    def test_leave_one_out_local_constant(self):
        data = regression_sample(25, seed=4)
        residuals = cv_residuals(data, 0.5, EstimatorConfig(method=Method.CL0), folds="loo")
        spec = KernelSpec.isotropic(0.5, 3)
        for i in (0, 7, 24):
            rest = data.subset([j for j in range(data.n) if j != i])
            expected = data.responses[i] - fit_local_constant_ls(spec, rest, data.point(i))
            assert residuals[i] == pytest.approx(expected, abs=1e-12)

    def test_two_points(self):
        data = regression_sample(2, seed=4)
        residuals = cv_residuals(data, 1.0, EstimatorConfig(method=Method.CL0), folds="loo")
        y = data.responses
        np.testing.assert_allclose(residuals, [y[0] - y[1], y[1] - y[0]])

    @pytest.mark.parametrize("method", [Method.CL1, Method.ROB0])
    def test_n_folds_is_leave_one_out(self, method):
        data = regression_sample(20, seed=9)
        estimator = EstimatorConfig(method=method)
        by_folds = cv_residuals(data, 0.8, estimator, folds=20, rng=RngStream(3))
        by_loo = cv_residuals(data, 0.8, estimator, folds="loo")
        np.testing.assert_allclose(by_folds, by_loo, rtol=0.0, atol=1e-12)

    def test_far_fold_is_marked_missing(self):
        data = regression_sample(30, seed=5)
        residuals = cv_residuals(data, 1e-4, EstimatorConfig(method=Method.CL0), folds="loo")
        assert np.isnan(residuals).all()


class TestSelection:
    def test_smallest_h_wins_ties(self):
        grid = np.array([0.1, 0.2, 0.3, 0.4])
        scores = np.array([2.0, 1.0, 1.0 + 1e-12, 1.0])
        assert _argmin_small_h(grid, scores, np.zeros(4, dtype=bool)) == 0.2

    def test_excluded_h_is_skipped(self):
        grid = np.array([0.1, 0.2, 0.3])
        scores = np.array([0.5, 1.0, 2.0])
        assert _argmin_small_h(grid, scores, np.array([True, False, False])) == 0.2

    def test_nothing_left(self):
        with pytest.raises(SmoothingException) as e:
            _argmin_small_h(np.array([0.1]), np.array([np.nan]), np.array([False]))
        assert e.value.error_code == SmoothingErrorCode.FOLD_TOO_SMALL

    def test_linear_data_selects_smallest_h(self):
        base = regression_sample(60, seed=14)
        data = Dataset(base.covariates, 0.3 + base.ilr_coords @ np.array([1.5, -0.7]))
        cfg = CvConfig(grid=[0.5, 1.0, 2.0], folds=5, criterion=CvCriterion.LS_CV, seed=4)
        result = select_bandwidth(data, cfg, EstimatorConfig(method=Method.CL1, fallback_to_constant=False))
        assert np.all(result.scores < 1e-20)
        assert result.chosen_h == 0.5

    def test_refinement_grid(self):
        np.testing.assert_allclose(refinement_grid(0.5, 0.1, 0.2), [0.3, 0.4, 0.5, 0.6, 0.7])
        assert np.all(refinement_grid(0.1, 0.1, 0.3) > 0.0)

    def test_classical_selection(self):
        data = regression_sample(60, seed=6)
        cfg = CvConfig(grid=[0.05, 0.3, 1.0, 5.0], folds=5, criterion=CvCriterion.LS_CV, seed=3)
        result = select_bandwidth(data, cfg, EstimatorConfig(method=Method.CL0))
        assert result.chosen_h in result.grid
        valid = ~result.excluded
        assert result.scores[result.grid == result.chosen_h][0] == pytest.approx(np.min(result.scores[valid]))
        assert result.residual_sets.shape == (4, 60)
        assert sum(row["chosen"] for row in result.rows()) == 1

    def test_partition_hash_is_reported(self):
        data = regression_sample(30, seed=6)
        cfg = CvConfig(grid=[0.5, 1.0], folds=3, criterion=CvCriterion.LS_CV, seed=8)
        result = select_bandwidth(data, cfg, EstimatorConfig(method=Method.CL1))
        assert result.partition_hash == partition_hash(make_partition(30, 3, RngStream(8, 0)))

    def test_refinement_extends_grid(self):
        data = regression_sample(40, seed=2)
        cfg = CvConfig(grid=[0.3, 1.0], folds=4, criterion=CvCriterion.LS_CV, refine_step=0.1, refine_radius=0.2)
        result = select_bandwidth(data, cfg, EstimatorConfig(method=Method.CL0))
        assert result.grid.size > 2
        assert np.all(np.diff(result.grid) > 0.0)

    def test_too_many_folds(self):
        data = regression_sample(8, seed=2)
        cfg = CvConfig(grid=[0.5], folds=10)
        with pytest.raises(SmoothingException) as e:
            select_bandwidth(data, cfg, EstimatorConfig(method=Method.CL0))
        assert e.value.error_code == SmoothingErrorCode.FOLD_TOO_SMALL

    def test_robust_selection_runs(self):
        data = regression_sample(50, seed=12)
        cfg = CvConfig(grid=[0.5, 1.0], folds=5, criterion=CvCriterion.ROBUST_CV, seed=1)
        result = select_bandwidth(data, cfg, EstimatorConfig(method=Method.ROB0))
        assert np.all(np.isfinite(result.scores))
        assert result.criterion == CvCriterion.ROBUST_CV.value

    @pytest.mark.slow
    def test_worker_count_does_not_change_result(self):
        data = regression_sample(40, seed=21)
        cfg = CvConfig(grid=[0.3, 0.6, 1.2], folds=4, seed=5)
        estimator = EstimatorConfig(method=Method.ROB1)
        single = select_bandwidth(data, cfg, estimator, threads=1)
        pooled = select_bandwidth(data, cfg, estimator, threads=3)
        np.testing.assert_array_equal(single.scores, pooled.scores)
        assert single.chosen_h == pooled.chosen_h


class TestRobustSelectionStudy:
    GRID = [0.25, 0.5, 1.0, 2.0, 4.0]

    @pytest.mark.slow
    def test_robust_cv_resists_vertical_outliers(self):
        alpha = DirichletParams(alpha=[5, 7, 1])
        clean = McScenario(alpha=alpha, n=100, n_reps=1, n_pred=100, seed=2024)
        test_parts = prediction_points(clean, 0)
        test_ilr = ilr_rows(test_parts)
        truths = true_regression_rows(test_parts, SimplexPoint(B_COMP))
        robust = EstimatorConfig(method=Method.ROB1)
        classical = EstimatorConfig(method=Method.CL1)

        def test_ise(data, h, estimator) -> float:
            fit = fit_estimator(data, test_ilr, h, estimator)
            ok = ~fit.failed
            if np.mean(fit.failed) > 0.2:
                return np.inf
            return ise(fit.estimates[ok], truths[ok])

        robust_hits = classical_hits = 0
        for seed in range(20):
            sc = McScenario(alpha=alpha, n=100, n_reps=1, seed=seed, error_law=ErrorLaw(delta=0.1, mu_shift=10))
            data = generate_sample(sc, 0)
            oracle = min(test_ise(data, h, robust) for h in self.GRID)
            robust_cfg = CvConfig(grid=self.GRID, folds=5, criterion=CvCriterion.ROBUST_CV, seed=seed)
            ls_cfg = CvConfig(grid=self.GRID, folds=5, criterion=CvCriterion.LS_CV, seed=seed)
            robust_h = select_bandwidth(data, robust_cfg, robust).chosen_h
            classical_h = select_bandwidth(data, ls_cfg, classical).chosen_h
            robust_hits += test_ise(data, robust_h, robust) <= 2.0 * oracle
            classical_hits += test_ise(data, classical_h, classical) >= 5.0 * oracle
        assert robust_hits >= 16
        assert classical_hits >= 16
