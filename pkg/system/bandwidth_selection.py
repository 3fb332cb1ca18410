"""
Вибір ширини вікна H = h I крос-валідацією: класичною (середній квадрат
залишків) та робастною (медіана² + робастна дисперсія²), у варіантах
leave-one-out та K-fold.
"""

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import stats

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.kernel_smoothing import Dataset, KernelSpec
from system.models import (
    TUKEY_C0,
    S_SCALE_B,
    CvConfig,
    CvCriterion,
    Dispersion,
    EstimatorConfig,
    Location,
    RhoFamily,
    RhoSpec,
)
from system.robust_estimation import fit_estimator, initial_scale, solve_s_scale
from tools.logger import Logger
from tools.rng import RngStream

logger = Logger()

MAD_CONSISTENCY = 1.4826
MAX_FAILED_FRACTION = 0.2
TIE_RTOL = 1e-9
TIE_ATOL = 1e-12

# τ-масштаб: c1 для кроку зваженого середнього, c2 для усікання квадратів
TAU_C1 = 4.5
TAU_C2 = 3.0

Folds = Union[int, str]


@dataclass(frozen=True)
class CvResult:
    """Значення критерію на сітці h та обране h."""
    grid: np.ndarray
    scores: np.ndarray
    chosen_h: float
    residual_sets: np.ndarray
    failed_fraction: np.ndarray
    excluded: np.ndarray
    partition_hash: str
    criterion: str

    def rows(self) -> List[dict]:
        return [
            {
                "h": float(h),
                "score": float(score),
                "failed_fraction": float(failed),
                "excluded": bool(excluded),
                "chosen": bool(h == self.chosen_h),
            }
            for h, score, failed, excluded in zip(self.grid, self.scores, self.failed_fraction, self.excluded)
        ]


def make_partition(n: int, folds: Folds, rng: Optional[RngStream] = None) -> List[np.ndarray]:
    """
    Розбиття індексів 0..n-1 на фолди.

    K-fold: перемішування Фішера-Єйтса (Generator.permutation) і
    суміжні блоки майже рівного розміру; "loo" - по одному індексу.
    """
    if folds == "loo":
        return [np.array([i]) for i in range(n)]
    k = int(folds)
    if k < 2 or k > n:
        raise SmoothingException(SmoothingErrorCode.FOLD_TOO_SMALL, f"K={k}, n={n}")
    rng = rng or RngStream(0)
    permutation = rng.generator.permutation(n)
    return [np.sort(block) for block in np.array_split(permutation, k)]


def partition_hash(partition: Sequence[np.ndarray]) -> str:
    digest = hashlib.sha256()
    for block in partition:
        digest.update(np.asarray(block, dtype=np.int64).tobytes())
        digest.update(b"|")
    return digest.hexdigest()


def cv_residuals(
        data: Dataset,
        h: float,
        estimator_config: EstimatorConfig,
        folds: Folds = "loo",
        rng: Optional[RngStream] = None,
        partition: Optional[List[np.ndarray]] = None
) -> np.ndarray:
    """
    Залишки крос-валідації ε_i(h) = y_i - m_h^(-j)(x_i), i ∈ C_j.

    Прогноз для i будується без фолду, що містить i; для робастних методів
    глобальний масштаб перераховується на кожній навчальній частині.
    Невдалі прогнози позначаються NaN.

    :return: n залишків у початковому порядку індексів.
    """
    if partition is None:
        partition = make_partition(data.n, folds, rng)
    residuals = np.full(data.n, np.nan)
    every = np.arange(data.n)
    for block in partition:
        train_idx = np.setdiff1d(every, block, assume_unique=True)
        if train_idx.size == 0:
            raise SmoothingException(SmoothingErrorCode.FOLD_TOO_SMALL, "порожня навчальна частина")
        train = data.subset(train_idx)
        try:
            sigma = None
            if estimator_config.method.robust:
                spec = KernelSpec.isotropic(h, data.dim)
                _, sigma = initial_scale(spec, estimator_config.smoother, train)
            fit = fit_estimator(train, data.ilr_coords[block], h, estimator_config, sigma=sigma)
        except SmoothingException as e:
            logger.debug(f"h={h}: фолд {block[:3].tolist()}... пропущено ({e.code})")
            continue
        ok = ~fit.failed
        residuals[block[ok]] = data.responses[block[ok]] - fit.estimates[ok]
    return residuals


def score_ls(residuals: Sequence[float]) -> float:
    """CV(h) = (1/n) Σ ε_i²."""
    values = np.asarray(residuals, dtype=float)
    if values.size == 0:
        raise SmoothingException(SmoothingErrorCode.LENGTH_MISMATCH, "порожні залишки")
    return float(np.mean(values * values))


def mad_scale(values: np.ndarray) -> float:
    """Нормована MAD: 1.4826 · med|z - med(z)|."""
    return MAD_CONSISTENCY * float(np.median(np.abs(values - np.median(values))))


def s_scale_dispersion(values: np.ndarray) -> float:
    """Бісквадратний S-масштаб (c0 = 1.54764, b = 1/2) навколо медіани."""
    abs_res = np.abs(values - np.median(values))
    try:
        return solve_s_scale(
            abs_res,
            np.full(values.size, 1.0 / values.size),
            RhoSpec(family=RhoFamily.TUKEY_BISQUARE, c=TUKEY_C0),
            S_SCALE_B,
        )
    except SmoothingException as e:
        if e.error_code in (SmoothingErrorCode.ZERO_SCALE, SmoothingErrorCode.NO_BRACKET):
            return 0.0
        raise


def _tau_consistency(c: float) -> float:
    # E[min(Z², c²)] для Z ~ N(0,1)
    inner = (2.0 * stats.norm.cdf(c) - 1.0) - 2.0 * c * stats.norm.pdf(c)
    return float(np.sqrt(inner + c * c * 2.0 * stats.norm.sf(c)))


def tau_scale(values: np.ndarray) -> float:
    """
    τ-масштаб: початкова MAD, бісквадратно зважене середнє (c1 = 4.5),
    усічений середній квадрат (c2 = 3), нормований до N(0,1).
    """
    s0 = mad_scale(values)
    if s0 == 0.0:
        return 0.0
    u = (values - np.median(values)) / (TAU_C1 * s0)
    w = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 2, 0.0)
    center = float(np.dot(w, values) / w.sum())
    z = (values - center) / s0
    return s0 * float(np.sqrt(np.mean(np.minimum(z * z, TAU_C2 * TAU_C2)))) / _tau_consistency(TAU_C2)


def score_robust(
        residuals: Sequence[float],
        location: Location = Location.MEDIAN,
        dispersion: Dispersion = Dispersion.MAD
) -> float:
    """RCV(h) = μ_n² + s_n²."""
    values = np.asarray(residuals, dtype=float)
    if values.size == 0:
        raise SmoothingException(SmoothingErrorCode.LENGTH_MISMATCH, "порожні залишки")
    mu = float(np.median(values))
    dispersion = Dispersion(dispersion)
    if dispersion == Dispersion.MAD:
        spread = mad_scale(values)
    elif dispersion == Dispersion.S_SCALE:
        spread = s_scale_dispersion(values)
    else:
        spread = tau_scale(values)
    return mu * mu + spread * spread


def _criterion_value(residuals: np.ndarray, cfg: CvConfig) -> float:
    finite = residuals[np.isfinite(residuals)]
    if finite.size == 0:
        return float("nan")
    if cfg.criterion == CvCriterion.LS_CV:
        return score_ls(finite)
    return score_robust(finite, cfg.location, cfg.dispersion)


def _evaluate_h(args):
    data, h, estimator_config, partition, cfg = args
    residuals = cv_residuals(data, h, estimator_config, partition=partition)
    failed = float(np.mean(~np.isfinite(residuals)))
    return residuals, failed, _criterion_value(residuals, cfg)


def _evaluate_grid(data, grid, estimator_config, partition, cfg, threads):
    tasks = [(data, float(h), estimator_config, partition, cfg) for h in grid]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_evaluate_h, tasks))
    else:
        results = [_evaluate_h(task) for task in tasks]
    for h, (_, failed, score) in zip(grid, results):
        logger.info(f"📊 h={h:.4g}: критерій={score:.6g}, невдалих прогнозів={failed:.1%}")
    return results


def _argmin_small_h(grid: np.ndarray, scores: np.ndarray, excluded: np.ndarray) -> float:
    valid = ~excluded & np.isfinite(scores)
    if not np.any(valid):
        raise SmoothingException(SmoothingErrorCode.FOLD_TOO_SMALL, "жодне h не має достатньо прогнозів")
    best = float(np.min(scores[valid]))
    ties = valid & (scores <= best + TIE_RTOL * abs(best) + TIE_ATOL)
    return float(grid[np.flatnonzero(ties)[0]])


def refinement_grid(chosen_h: float, step: float, radius: float) -> np.ndarray:
    """Сітка з кроком step у межах chosen_h ± radius (тільки додатні h)."""
    count = int(np.floor(radius / step + 1e-9))
    offsets = step * np.arange(-count, count + 1)
    grid = np.round(chosen_h + offsets, 12)
    return grid[grid > 0.0]


def select_bandwidth(
        data: Dataset,
        cfg: CvConfig,
        estimator_config: EstimatorConfig,
        threads: int = 1
) -> CvResult:
    """
    Мінімізація критерію CV на сітці h зі спільним розбиттям на фолди.

    h з часткою невдалих прогнозів понад 20% виключаються; за рівних
    значень обирається менше h. Якщо задано refine_step, сітка
    уточнюється навколо знайденого мінімуму.
    """
    if cfg.folds != "loo" and int(cfg.folds) > data.n:
        raise SmoothingException(SmoothingErrorCode.FOLD_TOO_SMALL, f"K={cfg.folds} > n={data.n}")
    partition = make_partition(data.n, cfg.folds, RngStream(cfg.seed, 0))
    digest = partition_hash(partition)
    logger.info(f"🔍 Крос-валідація {cfg.criterion.value}: {len(cfg.grid)} значень h, фолдів {len(partition)}")

    grid = np.asarray(cfg.grid, dtype=float)
    results = _evaluate_grid(data, grid, estimator_config, partition, cfg, threads)
    if cfg.refine_step is not None:
        coarse = np.array([r[2] for r in results])
        coarse_excluded = np.array([r[1] > MAX_FAILED_FRACTION for r in results])
        center = _argmin_small_h(grid, coarse, coarse_excluded)
        radius = cfg.refine_radius or (float(np.min(np.diff(grid))) if grid.size > 1 else cfg.refine_step)
        extra = np.array([h for h in refinement_grid(center, cfg.refine_step, radius)
                          if not np.any(np.isclose(h, grid, rtol=0.0, atol=1e-9))])
        if extra.size:
            results = results + _evaluate_grid(data, extra, estimator_config, partition, cfg, threads)
            grid = np.concatenate([grid, extra])

    order = np.argsort(grid, kind="stable")
    grid = grid[order]
    results = [results[i] for i in order]
    residual_sets = np.vstack([r[0] for r in results])
    failed = np.array([r[1] for r in results])
    scores = np.array([r[2] for r in results])
    excluded = failed > MAX_FAILED_FRACTION
    chosen = _argmin_small_h(grid, scores, excluded)
    logger.info(f"✅ Обрано h={chosen:.4g}")
    return CvResult(
        grid=grid,
        scores=scores,
        chosen_h=chosen,
        residual_sets=residual_sets,
        failed_fraction=failed,
        excluded=excluded,
        partition_hash=digest,
        criterion=cfg.criterion.value,
    )
