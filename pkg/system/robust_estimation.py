"""
Обмежені ρ-функції, локальні та глобальні робастні оцінки масштабу і
робастні локально сталий та локально лінійний M-згладжувачі (IRWLS).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.kernel_smoothing import (
    Dataset,
    KernelSpec,
    SmootherFit,
    WeightVector,
    _coords,
    design_matrix,
    effective_neighbors,
    fit_classical_surface,
    kernel_weights,
    local_medians,
    solve_weighted_normal_equations,
    weight_matrix,
    weighted_quantile,
)
from system.models import EstimatorConfig, MSmootherConfig, PolyDegree, RhoFamily, RhoSpec, ScaleKind, ScaleMode, ScaleSpec
from system.simplex_core import SimplexPoint, points_to_rows, ilr_rows
from tools.logger import Logger

logger = Logger()

BRACKET_SHRINK = 1e6
BRACKET_FLOOR = 1e-12
BRACKET_RTOL = 1e-12

Real = Union[float, np.ndarray]


def _out(values: np.ndarray, r) -> Real:
    return float(values) if np.ndim(r) == 0 else values


def rho(spec: RhoSpec, r: Real) -> Real:
    """ρ_c(r) = ρ(r/c)."""
    s = np.asarray(r, dtype=float) / spec.c
    a = np.abs(s)
    if spec.family == RhoFamily.TUKEY_BISQUARE:
        s2 = s * s
        values = np.where(a <= 1.0, 3.0 * s2 - 3.0 * s2 * s2 + s2 * s2 * s2, 1.0)
    elif spec.family == RhoFamily.HUBER:
        values = np.where(a <= 1.0, 0.5 * s * s, a - 0.5)
    else:
        values = (a > 1.0).astype(float)
    return _out(values, r)


def psi(spec: RhoSpec, r: Real) -> Real:
    """ψ_c = d/dr ρ_c; для жорсткого відкидання ψ ≡ 0."""
    s = np.asarray(r, dtype=float) / spec.c
    a = np.abs(s)
    if spec.family == RhoFamily.TUKEY_BISQUARE:
        s2 = s * s
        values = np.where(a <= 1.0, (6.0 * s - 12.0 * s * s2 + 6.0 * s * s2 * s2) / spec.c, 0.0)
    elif spec.family == RhoFamily.HUBER:
        values = np.clip(s, -1.0, 1.0) / spec.c
    else:
        values = np.zeros_like(s)
    return _out(values, r)


def weight_w(spec: RhoSpec, r: Real) -> Real:
    """W_c(r) = ψ_c(r)/r з аналітичною границею в нулі."""
    r_arr = np.asarray(r, dtype=float)
    s = r_arr / spec.c
    a = np.abs(s)
    c2 = spec.c * spec.c
    if spec.family == RhoFamily.TUKEY_BISQUARE:
        values = np.where(a <= 1.0, 6.0 * (1.0 - s * s) ** 2 / c2, 0.0)
    elif spec.family == RhoFamily.HUBER:
        with np.errstate(divide="ignore"):
            values = np.where(a <= 1.0, 1.0 / c2, 1.0 / (spec.c * np.abs(r_arr)))
    else:
        values = np.zeros_like(s)
    return _out(values, r)


# ---------------------------------------------------------------- масштаб

def local_mad(weights: WeightVector, responses: Sequence[float], m_ini: float) -> float:
    """Зважена медіана |y_i - m_INI|."""
    abs_res = np.abs(np.asarray(responses, dtype=float) - m_ini)
    value = weighted_quantile(weights, abs_res, 0.5)
    if value <= 0.0:
        raise SmoothingException(SmoothingErrorCode.ZERO_SCALE, "локальна MAD")
    return value


def solve_s_scale(abs_res: np.ndarray, weights: np.ndarray, rho0: RhoSpec, b: float) -> float:
    """
    Корінь s рівняння Σ w_i ρ_c0(r_i / s) = b.

    Функція s -> Σ w_i ρ(r_i/s) - b незростаюча, тож після локалізації
    кореня бісекція завжди збігається.
    """
    abs_res = np.abs(np.asarray(abs_res, dtype=float))
    w = np.asarray(weights, dtype=float)
    nonzero = abs_res > 0.0
    if not np.any(nonzero):
        raise SmoothingException(SmoothingErrorCode.ZERO_SCALE, "усі залишки нульові")
    if rho0.bounded and float(np.sum(w[nonzero])) * rho0.sup <= b:
        raise SmoothingException(
            SmoothingErrorCode.NO_BRACKET,
            f"маса ненульових залишків {float(np.sum(w[nonzero])):.3g} <= b={b}"
        )

    def excess(s: float) -> float:
        return float(np.dot(w, rho(rho0, abs_res / s))) - b

    lo = max(float(np.median(abs_res[nonzero])) / BRACKET_SHRINK, BRACKET_FLOOR)
    hi = 10.0 * float(abs_res.max())
    for _ in range(60):
        if excess(lo) > 0.0:
            break
        lo /= 10.0
    else:
        raise SmoothingException(SmoothingErrorCode.NO_BRACKET, "нижня межа")
    for _ in range(60):
        if excess(hi) < 0.0:
            break
        hi *= 10.0
    else:
        raise SmoothingException(SmoothingErrorCode.NO_BRACKET, "верхня межа")
    return float(optimize.bisect(excess, lo, hi, xtol=np.finfo(float).tiny, rtol=BRACKET_RTOL, maxiter=1000))


def local_s_scale(weights: WeightVector, responses: Sequence[float], m_ini: float, spec: ScaleSpec) -> float:
    """Локальний S-масштаб: Σ w_i(x) ρ_c0((y_i - m_INI(x))/s) = b."""
    abs_res = np.abs(np.asarray(responses, dtype=float) - m_ini)
    return solve_s_scale(abs_res, weights.weights, spec.rho0, spec.b)


def global_s_scale(data: Dataset, m_ini_values: Sequence[float], spec: ScaleSpec) -> float:
    """Глобальний S-масштаб: (1/n) Σ ρ_c0((y_i - m_INI(x_i))/s) = b."""
    m_ini = np.asarray(m_ini_values, dtype=float)
    if m_ini.size != data.n:
        raise SmoothingException(SmoothingErrorCode.LENGTH_MISMATCH, f"{m_ini.size} != {data.n}")
    abs_res = np.abs(data.responses - m_ini)
    return solve_s_scale(abs_res, np.full(data.n, 1.0 / data.n), spec.rho0, spec.b)


# ---------------------------------------------------------- M-згладжувачі

@dataclass
class PointFit:
    """Оцінка в одній точці запиту."""
    estimate: float
    slope: Optional[np.ndarray] = None
    converged: bool = True
    iterations: int = 0
    fallback: bool = False
    objective: List[float] = field(default_factory=list)


def m_objective(rho1: RhoSpec, weights: np.ndarray, residuals: np.ndarray, sigma: float) -> float:
    """Γ(x, a, σ) = Σ w_i ρ_c1(r_i / σ)."""
    return float(np.dot(weights, rho(rho1, residuals / sigma)))


def irwls_constant(
        weights: np.ndarray,
        responses: np.ndarray,
        start: float,
        sigma: float,
        cfg: MSmootherConfig,
        trace: bool = False
) -> PointFit:
    """Ітерації локального M-згладжувача з локальної медіани."""
    m = float(start)
    objective = [m_objective(cfg.rho1, weights, responses - m, sigma)] if trace else []
    for iteration in range(1, cfg.max_iter + 1):
        robust_w = weights * weight_w(cfg.rho1, (responses - m) / sigma)
        total = float(robust_w.sum())
        if total <= 0.0:
            # усі залишки поза носієм ψ: зупиняємось на поточній ітерації
            return PointFit(m, converged=False, iterations=iteration, objective=objective)
        m_new = float(np.dot(robust_w, responses) / total)
        if trace:
            objective.append(m_objective(cfg.rho1, weights, responses - m_new, sigma))
        if abs(m_new - m) <= cfg.tol * (1.0 + abs(m_new)):
            return PointFit(m_new, converged=True, iterations=iteration, objective=objective)
        m = m_new
    return PointFit(m, converged=False, iterations=cfg.max_iter, objective=objective)


def irwls_linear(
        weights: np.ndarray,
        responses: np.ndarray,
        design: np.ndarray,
        start: float,
        sigma: float,
        cfg: MSmootherConfig
) -> PointFit:
    """Ітерації локально лінійного M-згладжувача з (медіана, 0)."""
    beta = np.zeros(design.shape[1])
    beta[0] = start
    for iteration in range(1, cfg.max_iter + 1):
        residuals = responses - design @ beta
        robust_w = weights * weight_w(cfg.rho1, residuals / sigma)
        if float(robust_w.sum()) <= 0.0:
            return PointFit(float(beta[0]), beta[1:].copy(), converged=False, iterations=iteration)
        beta_new = solve_weighted_normal_equations(design, robust_w, responses)
        step = float(np.max(np.abs(beta_new - beta)))
        beta = beta_new
        if step <= cfg.tol * (1.0 + abs(beta[0])):
            return PointFit(float(beta[0]), beta[1:].copy(), converged=True, iterations=iteration)
    return PointFit(float(beta[0]), beta[1:].copy(), converged=False, iterations=cfg.max_iter)


def _check_sigma(sigma: float):
    if not (np.isfinite(sigma) and sigma > 0.0):
        raise SmoothingException(SmoothingErrorCode.ZERO_SCALE, f"sigma={sigma}")


def fit_local_m(spec: KernelSpec, cfg: MSmootherConfig, data: Dataset, x, sigma: float, trace: bool = False) -> PointFit:
    """
    Робастний локальний M-згладжувач у точці x.

    Стартує з локальної медіани; незбіжність повертає останню ітерацію
    з converged=False.
    """
    _check_sigma(sigma)
    weights = kernel_weights(spec, data, x)
    start = weighted_quantile(weights, data.responses, 0.5)
    return irwls_constant(weights.weights, data.responses, start, sigma, cfg, trace=trace)


def fit_local_linear_m(
        spec: KernelSpec,
        cfg: MSmootherConfig,
        data: Dataset,
        x,
        sigma: float,
        fallback_to_constant: bool = False
) -> PointFit:
    """
    Робастний локально лінійний M-згладжувач у точці x.

    :return: PointFit з оцінкою b0 та нахилом b1*.
    """
    _check_sigma(sigma)
    x_star = _coords(x)
    weights = kernel_weights(spec, data, x_star)
    start = weighted_quantile(weights, data.responses, 0.5)
    if fallback_to_constant and effective_neighbors(weights.weights) < data.dim:
        result = irwls_constant(weights.weights, data.responses, start, sigma, cfg)
        result.fallback = True
        return result
    try:
        return irwls_linear(
            weights.weights, data.responses, design_matrix(data.ilr_coords, x_star), start, sigma, cfg
        )
    except SmoothingException as e:
        if not fallback_to_constant or e.error_code != SmoothingErrorCode.SINGULAR_DESIGN:
            raise
        result = irwls_constant(weights.weights, data.responses, start, sigma, cfg)
        result.fallback = True
        return result


def estimating_equation(
        spec: KernelSpec,
        cfg: MSmootherConfig,
        data: Dataset,
        x,
        sigma: float,
        fit: PointFit
) -> np.ndarray:
    """
    Ліва частина рівняння Σ w_i ψ_c1(r_i/σ) (1, x_i* - x*)^T, нормована на Σ w_i.

    Для локально сталої оцінки повертається вектор довжини 1.
    """
    x_star = _coords(x)
    weights = kernel_weights(spec, data, x_star).weights
    if fit.slope is None:
        residuals = data.responses - fit.estimate
        return np.array([np.dot(weights, psi(cfg.rho1, residuals / sigma))]) / weights.sum()
    design = design_matrix(data.ilr_coords, x_star)
    residuals = data.responses - design @ np.concatenate([[fit.estimate], fit.slope])
    scores = weights * psi(cfg.rho1, residuals / sigma)
    return (design.T @ scores) / weights.sum()


def _query_coords(query_points) -> np.ndarray:
    if isinstance(query_points, np.ndarray):
        return np.atleast_2d(query_points)
    points = list(query_points)
    if points and isinstance(points[0], SimplexPoint):
        return ilr_rows(points_to_rows(points))
    return np.atleast_2d(np.asarray([_coords(p) for p in points], dtype=float))


def initial_scale(spec: KernelSpec, cfg: MSmootherConfig, data: Dataset) -> Tuple[np.ndarray, float]:
    """Локальні медіани в точках даних та глобальний S-масштаб їхніх залишків."""
    m_ini, ok = local_medians(spec, data, data.ilr_coords)
    if not np.all(ok):
        raise SmoothingException(SmoothingErrorCode.ALL_WEIGHTS_ZERO, "локальна медіана в точці даних")
    return m_ini, global_s_scale(data, m_ini, cfg.scale)


def fit_surface(
        spec: KernelSpec,
        cfg: MSmootherConfig,
        data: Dataset,
        query_points,
        scale_mode: ScaleMode = ScaleMode.GLOBAL,
        fallback_to_constant: bool = True,
        method: str = "rob",
        with_residuals: bool = True,
        sigma: Optional[float] = None
) -> SmootherFit:
    """
    Повний конвеєр робастного згладжування.

    (1) локальні медіани в точках даних, (2) глобальний S-масштаб або
    локальний масштаб у кожній точці запиту, (3) M-згладжувач у кожній
    точці запиту. Помилки в окремих точках позначаються прапорцями.

    :param sigma: Готовий глобальний масштаб (пропускає кроки 1-2).
    """
    query = _query_coords(query_points)
    if sigma is None:
        _, sigma = initial_scale(spec, cfg, data)
    estimates, scales, converged, fallback, failed, messages = _robust_at(
        spec, cfg, data, query, ScaleMode(scale_mode), sigma, fallback_to_constant
    )
    residuals = fitted = None
    if with_residuals:
        fitted, _, _, _, data_failed, _ = _robust_at(
            spec, cfg, data, data.ilr_coords, ScaleMode(scale_mode), sigma, fallback_to_constant
        )
        residuals = np.where(data_failed, np.nan, data.responses - fitted)
    if messages:
        logger.warning(f"⚠️ {method}: {len(messages)} точок з прапорцями")
    return SmootherFit(
        method=method,
        bandwidth=float(spec.bandwidth[0, 0]),
        query_ilr=query,
        estimates=estimates,
        scale=scales,
        converged=converged,
        fallback=fallback,
        failed=failed,
        residuals=residuals,
        fitted=fitted,
        messages=messages,
    )


def _local_scale(cfg: MSmootherConfig, weights: WeightVector, responses: np.ndarray, m_ini: float) -> float:
    if cfg.scale.kind == ScaleKind.LOCAL_MAD:
        return local_mad(weights, responses, m_ini)
    return local_s_scale(weights, responses, m_ini, cfg.scale)


def _robust_at(spec, cfg, data, query, scale_mode, sigma, fallback_to_constant):
    q = query.shape[0]
    weights, ok = weight_matrix(spec, data.ilr_coords, query)
    estimates = np.full(q, np.nan)
    scales = np.full(q, sigma)
    converged = np.zeros(q, dtype=bool)
    fallback = np.zeros(q, dtype=bool)
    failed = ~ok
    messages = [f"точка {s}: {SmoothingErrorCode.ALL_WEIGHTS_ZERO.value}" for s in np.flatnonzero(~ok)]
    linear = cfg.local_poly_degree == PolyDegree.LINEAR
    for s in np.flatnonzero(ok):
        w = weights[s]
        start = weighted_quantile(w, data.responses, 0.5)
        if scale_mode == ScaleMode.LOCAL:
            try:
                scales[s] = _local_scale(cfg, WeightVector(w), data.responses, start)
            except SmoothingException as e:
                # нульовий локальний масштаб замінюється глобальним
                scales[s] = sigma
                messages.append(f"точка {s}: {e.code} -> глобальний масштаб")
        try:
            if linear and not (fallback_to_constant and effective_neighbors(w) < data.dim):
                try:
                    result = irwls_linear(
                        w, data.responses, design_matrix(data.ilr_coords, query[s]), start, scales[s], cfg
                    )
                except SmoothingException as e:
                    if not fallback_to_constant or e.error_code != SmoothingErrorCode.SINGULAR_DESIGN:
                        raise
                    result = irwls_constant(w, data.responses, start, scales[s], cfg)
                    result.fallback = True
            else:
                result = irwls_constant(w, data.responses, start, scales[s], cfg)
                result.fallback = linear
        except SmoothingException as e:
            failed[s] = True
            messages.append(f"точка {s}: {e.code}")
            continue
        estimates[s] = result.estimate
        converged[s] = result.converged
        fallback[s] = result.fallback
        if not result.converged:
            messages.append(f"точка {s}: {SmoothingErrorCode.NO_CONVERGENCE.value}")
    return estimates, scales, converged, fallback, failed, messages


def fit_estimator(
        data: Dataset,
        query_points,
        h: float,
        estimator: EstimatorConfig,
        with_residuals: bool = False,
        sigma: Optional[float] = None,
        threads: int = 1
) -> SmootherFit:
    """
    Оцінювач CL0/CL1/ROB0/ROB1 з H = h I у точках запиту.

    :param sigma: Готовий глобальний масштаб для робастних методів.
    :param threads: Кількість процесів; точки запиту діляться на суцільні блоки,
        результат не залежить від threads.
    """
    spec = KernelSpec.isotropic(h, data.dim)
    query = _query_coords(query_points)
    if threads > 1 and query.shape[0] > threads and not with_residuals:
        if estimator.method.robust and sigma is None:
            _, sigma = initial_scale(spec, estimator.smoother, data)
        chunks = np.array_split(query, threads)
        tasks = [(data, chunk, h, estimator, sigma) for chunk in chunks]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return merge_fits(list(pool.map(_fit_chunk, tasks)))
    if estimator.method.robust:
        return fit_surface(
            spec,
            estimator.smoother,
            data,
            query,
            scale_mode=estimator.scale_mode,
            fallback_to_constant=estimator.fallback_to_constant,
            method=estimator.method.value,
            with_residuals=with_residuals,
            sigma=sigma,
        )
    return fit_classical_surface(
        spec,
        data,
        query,
        linear=estimator.method.degree == PolyDegree.LINEAR,
        fallback_to_constant=estimator.fallback_to_constant,
        method=estimator.method.value,
        with_residuals=with_residuals,
    )


def _fit_chunk(args) -> SmootherFit:
    data, chunk, h, estimator, sigma = args
    return fit_estimator(data, chunk, h, estimator, sigma=sigma)


def merge_fits(fits: Sequence[SmootherFit]) -> SmootherFit:
    """Об'єднання результатів для послідовних блоків точок запиту."""
    messages = []
    offset = 0
    for fit in fits:
        for message in fit.messages:
            head, rest = message.split(":", 1)
            messages.append(f"точка {int(head.split()[1]) + offset}:{rest}")
        offset += fit.query_ilr.shape[0]
    return SmootherFit(
        method=fits[0].method,
        bandwidth=fits[0].bandwidth,
        query_ilr=np.vstack([f.query_ilr for f in fits]),
        estimates=np.concatenate([f.estimates for f in fits]),
        scale=np.concatenate([f.scale for f in fits]),
        converged=np.concatenate([f.converged for f in fits]),
        fallback=np.concatenate([f.fallback for f in fits]),
        failed=np.concatenate([f.failed for f in fits]),
        messages=messages,
    )
