"""Dirichlet, логістично-нормальний закон та забруднені похибки."""

import numpy as np
import pytest
from pydantic import ValidationError

from system.models import DirichletParams, ErrorLaw, LogisticNormalParams
from system.simplex_core import IlrVector, SimplexPoint, ilr, ilr_rows
from system.simplex_models import (
    dirichlet_density,
    dirichlet_sample,
    dirichlet_sample_rows,
    error_sample,
    error_sample_rows,
    logistic_normal_density_ilr,
    logistic_normal_sample,
)
from tools.rng import RngStream


class TestDirichlet:
    def test_uniform_density(self):
        assert dirichlet_density(SimplexPoint([0.2, 0.3, 0.5]), DirichletParams(alpha=[1, 1, 1])) == pytest.approx(2.0)

    def test_density_formula(self):
        x = SimplexPoint([0.2, 0.8])
        # Beta(2, 3): 12 x (1-x)^2
        assert dirichlet_density(x, DirichletParams(alpha=[2, 3])) == pytest.approx(12 * 0.2 * 0.8 ** 2)

    def test_same_stream_same_draw(self):
        p = DirichletParams(alpha=[5, 7, 1])
        assert dirichlet_sample(p, RngStream(3, 1)) == dirichlet_sample(p, RngStream(3, 1))

    def test_different_streams_differ(self):
        p = DirichletParams(alpha=[5, 7, 1])
        assert dirichlet_sample(p, RngStream(3, 1)) != dirichlet_sample(p, RngStream(3, 2))

    def test_empirical_mean(self):
        p = DirichletParams(alpha=[5, 7, 4])
        rows = dirichlet_sample_rows(p, 20000, RngStream(11))
        np.testing.assert_allclose(rows.mean(axis=0), np.array([5, 7, 4]) / 16, atol=0.01)
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)

    def test_small_alpha_draws_are_positive(self):
        rows = dirichlet_sample_rows(DirichletParams(alpha=[0.3, 0.3, 0.3]), 500, RngStream(5))
        assert np.all(rows > 0.0)

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValidationError):
            DirichletParams(alpha=[1.0, 0.0, 2.0])


class TestLogisticNormal:
    def test_density_at_mean(self):
        p = LogisticNormalParams(mu=[0.0, 0.0], sigma=[[1.0, 0.0], [0.0, 1.0]])
        assert logistic_normal_density_ilr(IlrVector([0.0, 0.0]), p) == pytest.approx(1.0 / (2.0 * np.pi))

    def test_sample_mean_in_ilr(self):
        p = LogisticNormalParams(mu=[0.5, -0.2], sigma=[[0.2, 0.05], [0.05, 0.1]])
        rng = RngStream(9)
        coords = np.array([ilr(logistic_normal_sample(p, rng)).coords for _ in range(4000)])
        np.testing.assert_allclose(coords.mean(axis=0), p.mu, atol=0.03)

    def test_rejects_asymmetric_sigma(self):
        with pytest.raises(ValidationError):
            LogisticNormalParams(mu=[0.0, 0.0], sigma=[[1.0, 0.5], [0.0, 1.0]])

    def test_rejects_indefinite_sigma(self):
        with pytest.raises(ValidationError):
            LogisticNormalParams(mu=[0.0, 0.0], sigma=[[1.0, 2.0], [2.0, 1.0]])


class TestErrorLaw:
    def test_clean_law_is_standard_normal(self):
        values = error_sample_rows(ErrorLaw(), 50000, RngStream(1))
        assert abs(values.mean()) < 0.03
        assert values.std() == pytest.approx(1.0, abs=0.03)

    def test_contaminated_mixture(self):
        law = ErrorLaw(delta=0.1, mu_shift=10.0)
        values = error_sample_rows(law, 50000, RngStream(2))
        shifted = np.abs(values - 10.0) < 1.0
        assert shifted.mean() == pytest.approx(0.1, abs=0.01)
        assert values[shifted].std() == pytest.approx(0.1, abs=0.01)

    def test_single_draw_is_deterministic(self):
        assert error_sample(ErrorLaw(), RngStream(4, 2)) == error_sample(ErrorLaw(), RngStream(4, 2))

    def test_labels(self):
        assert ErrorLaw().label == "C0"
        assert ErrorLaw(delta=0.1, mu_shift=10).label == "C1_0.1_10"

    def test_delta_bounds(self):
        with pytest.raises(ValidationError):
            ErrorLaw(delta=1.0)

    def test_ilr_rows_of_samples(self):
        rows = dirichlet_sample_rows(DirichletParams(alpha=[5, 7, 1]), 10, RngStream(0))
        assert ilr_rows(rows).shape == (10, 2)
