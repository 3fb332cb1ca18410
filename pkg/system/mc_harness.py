"""
Експеримент Монте-Карло: Y = sin(<X, b>_a) + σ ε, X ~ Dirichlet(α).

Кожна реплікація має власні потоки випадкових чисел, ключовані
(seed, rep_index), тож результат не залежить від кількості процесів.
Сітка прогнозу спільна для всіх реплікацій сценарію (потік rep_index = 0).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.kernel_smoothing import Dataset, KernelSpec
from system.models import EstimatorConfig, McScenario, ScaleMode
from system.robust_estimation import fit_estimator, initial_scale
from system.simplex_core import SimplexPoint, aitchison_inner, clr, clr_rows, ilr_rows
from system.simplex_models import dirichlet_sample_rows, error_sample_rows
from tools.logger import Logger
from tools.rng import RngStream

logger = Logger()

MAX_EXCLUSION_RATE = 0.01

# Підпотоки реплікації
COVARIATE_STREAM = 0
ERROR_STREAM = 1
PREDICTION_STREAM = 2


@dataclass(frozen=True)
class McReport:
    """Підсумок сценарію: MISE, Bias² та ISE кожної реплікації за оцінювачами."""
    scenario: str
    h: float
    n_reps: int
    estimators: List[str]
    mise: Dict[str, float]
    bias2: Dict[str, float]
    ise: Dict[str, np.ndarray]
    rep_indices: Dict[str, np.ndarray]
    n_failures: Dict[str, int]

    def exclusion_rate(self, estimator: str) -> float:
        return self.n_failures[estimator] / self.n_reps

    def ensure_reproducible(self, max_rate: float = MAX_EXCLUSION_RATE):
        """REPRODUCTION_FAILED, якщо хоч один оцінювач виключив більше max_rate реплікацій."""
        bad = [e for e in self.estimators if self.exclusion_rate(e) > max_rate]
        if bad:
            details = ", ".join(f"{e}: {self.n_failures[e]}/{self.n_reps}" for e in bad)
            raise SmoothingException(SmoothingErrorCode.REPRODUCTION_FAILED, f"{self.scenario}: {details}")

    def rows(self) -> List[dict]:
        return [
            {
                "estimator": e,
                "scenario": self.scenario,
                "mise": self.mise[e],
                "bias2": self.bias2[e],
                "n_failures": self.n_failures[e],
            }
            for e in self.estimators
        ]


def true_regression(x: SimplexPoint, b_comp: SimplexPoint) -> float:
    """m(x) = sin(<x, b>_a)."""
    return float(np.sin(aitchison_inner(x, b_comp)))


def true_regression_rows(parts: np.ndarray, b_comp: SimplexPoint) -> np.ndarray:
    parts = np.atleast_2d(parts)
    if parts.shape[1] != b_comp.dim:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"{parts.shape[1]} != {b_comp.dim}")
    return np.sin(clr_rows(parts) @ clr(b_comp))


def prediction_points(sc: McScenario, rep_index: int) -> np.ndarray:
    """M нових коваріат з Dirichlet(α) у потоці реплікації rep_index."""
    rng = RngStream(sc.seed, rep_index).child(PREDICTION_STREAM)
    return dirichlet_sample_rows(sc.alpha, sc.n_pred, rng)


def generate_sample(sc: McScenario, rep_index: int) -> Dataset:
    """Коваріати та відгуки реплікації rep_index, без точок прогнозу."""
    stream = RngStream(sc.seed, rep_index)
    covariates = dirichlet_sample_rows(sc.alpha, sc.n, stream.child(COVARIATE_STREAM))
    errors = error_sample_rows(sc.error_law, sc.n, stream.child(ERROR_STREAM))
    responses = true_regression_rows(covariates, SimplexPoint(sc.b_comp)) + sc.sigma * errors
    return Dataset(covariates, responses)


def generate_replication(sc: McScenario, rep_index: int) -> Tuple[Dataset, np.ndarray]:
    """
    Одна реплікація сценарію.

    :return: вибірка з n спостережень та M x D точок прогнозу.
    """
    return generate_sample(sc, rep_index), prediction_points(sc, rep_index)


def ise(estimates: Sequence[float], truths: Sequence[float]) -> float:
    """ISE = (1/M) Σ (m̂(x_s) - m(x_s))²."""
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truths, dtype=float)
    if est.shape != tru.shape or est.size == 0:
        raise SmoothingException(SmoothingErrorCode.LENGTH_MISMATCH, f"{est.shape} != {tru.shape}")
    diff = est - tru
    return float(np.mean(diff * diff))


def squared_bias(all_estimates: np.ndarray, truths: Sequence[float]) -> float:
    """Bias² = (1/M) Σ_s ((1/N) Σ_l m̂_l(x_s) - m(x_s))²."""
    est = np.atleast_2d(np.asarray(all_estimates, dtype=float))
    tru = np.asarray(truths, dtype=float)
    if est.shape[1] != tru.size or est.shape[0] == 0:
        raise SmoothingException(SmoothingErrorCode.LENGTH_MISMATCH, f"{est.shape} vs {tru.size}")
    return ise(est.mean(axis=0), tru)


def _replication_task(args) -> Dict[str, Optional[np.ndarray]]:
    sc, rep_index, grid_ilr = args
    return run_replication(sc, rep_index, grid_ilr)


def run_replication(sc: McScenario, rep_index: int, grid_ilr: np.ndarray) -> Dict[str, Optional[np.ndarray]]:
    """
    Оцінки всіх оцінювачів сценарію на спільній сітці.

    Значення None означає, що оцінювач виключено з цієї реплікації
    (невдача або відсутність збіжності хоча б в одній точці).
    """
    data = generate_sample(sc, rep_index)
    h = sc.h
    sigma = None
    robust_ok = True
    if any(m.robust for m in sc.estimators):
        try:
            _, sigma = initial_scale(KernelSpec.isotropic(h, data.dim), sc.m_config, data)
        except SmoothingException as e:
            logger.warning(f"⚠️ Реплікація {rep_index}: глобальний масштаб недоступний ({e.code})")
            robust_ok = False

    results: Dict[str, Optional[np.ndarray]] = {}
    for method in sc.estimators:
        if method.robust and not robust_ok:
            results[method.value] = None
            continue
        estimator = EstimatorConfig(method=method, m_config=sc.m_config, scale_mode=ScaleMode.GLOBAL)
        try:
            fit = fit_estimator(data, grid_ilr, h, estimator, sigma=sigma if method.robust else None)
        except SmoothingException as e:
            logger.warning(f"⚠️ Реплікація {rep_index}, {method.value}: {e.code}")
            results[method.value] = None
            continue
        excluded = fit.n_failed > 0 or fit.n_not_converged > 0
        results[method.value] = None if excluded else fit.estimates
    return results


def run_study(sc: McScenario, threads: int = 1) -> McReport:
    """
    Усі реплікації сценарію та агрегування MISE і Bias².

    Реплікації виконуються незалежно (за потреби паралельно), а
    агрегування відбувається у порядку rep_index.
    """
    grid_parts = prediction_points(sc, 0)
    grid_ilr = ilr_rows(grid_parts)
    truths = true_regression_rows(grid_parts, SimplexPoint(sc.b_comp))
    logger.info(
        f"🚀 Сценарій {sc.label}: n={sc.n}, N={sc.n_reps}, M={sc.n_pred}, h={sc.h:g}, процесів {threads}"
    )

    tasks = [(sc, r, grid_ilr) for r in range(sc.n_reps)]
    if threads > 1 and sc.n_reps > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_replication_task, tasks, chunksize=max(1, sc.n_reps // (4 * threads))))
    else:
        outcomes = [_replication_task(task) for task in tasks]

    names = [m.value for m in sc.estimators]
    mise, bias2, ise_values, indices, failures = {}, {}, {}, {}, {}
    for name in names:
        kept = [(r, out[name]) for r, out in enumerate(outcomes) if out[name] is not None]
        failures[name] = sc.n_reps - len(kept)
        indices[name] = np.array([r for r, _ in kept], dtype=int)
        if not kept:
            raise SmoothingException(SmoothingErrorCode.REPRODUCTION_FAILED, f"{sc.label}: {name} без жодної реплікації")
        matrix = np.vstack([est for _, est in kept])
        ise_values[name] = np.array([ise(row, truths) for row in matrix])
        mise[name] = float(np.mean(ise_values[name]))
        bias2[name] = squared_bias(matrix, truths)
        logger.info(
            f"📊 {sc.label} {name}: MISE={mise[name]:.4f}, Bias²={bias2[name]:.4f}, виключено {failures[name]}"
        )

    return McReport(
        scenario=sc.label,
        h=sc.h,
        n_reps=sc.n_reps,
        estimators=names,
        mise=mise,
        bias2=bias2,
        ise=ise_values,
        rep_indices=indices,
        n_failures=failures,
    )


def run_table(scenarios: Sequence[McScenario], threads: int = 1) -> List[McReport]:
    """Кілька законів похибок (колонок таблиці) за один запуск."""
    return [run_study(sc, threads) for sc in scenarios]
