"""
Спільні фікстури для тестів.

Запуск:  python -m pytest -m "not slow"
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from system.kernel_smoothing import Dataset
from system.models import DirichletParams
from system.simplex_core import SimplexPoint, clr_rows, clr
from system.simplex_models import dirichlet_sample_rows
from tools.rng import RngStream

B_COMP = [0.05920067, 0.7193872, 0.2214121]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_parts(rng):
    """Випадкові композиції для D = 2..10 без вироджених компонент."""
    def draw(dim: int, size: int = 200) -> np.ndarray:
        return rng.dirichlet(np.full(dim, 2.0), size=size)
    return draw


def regression_sample(n: int, seed: int, noise: float = 0.1, alpha=(5.0, 7.0, 4.0)) -> Dataset:
    covariates = dirichlet_sample_rows(DirichletParams(alpha=list(alpha)), n, RngStream(seed, 0))
    truth = np.sin(clr_rows(covariates) @ clr(SimplexPoint(B_COMP)))
    noise_values = RngStream(seed, 1).generator.standard_normal(n) * noise
    return Dataset(covariates, truth + noise_values)


@pytest.fixture
def sample():
    """n = 80 спостережень з моделі y = sin(<x, b>_a) + 0.1 ε."""
    return regression_sample(80, seed=7)
