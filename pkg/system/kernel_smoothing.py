"""
Симпліціальні ядра, ядрові ваги, зважена умовна функція розподілу та
класичні (найменші квадрати) локально сталий і локально лінійний згладжувачі.

Ядро K_H(u ⊖ x) = det(H)^{-1} K~(H^{-1}(u* - x*)) обчислюється в
координатах ilr, K~ - стандартна багатовимірна нормальна щільність.
"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.models import KernelProfile
from system.simplex_core import IlrVector, SimplexPoint, ilr, ilr_rows, points_to_rows

COND_LIMIT = 1e12
CDF_TOL = 1e-12


class KernelSpec:
    """Гауссове симпліціальне ядро з матрицею ширини вікна H."""

    __slots__ = ("profile", "bandwidth", "_inv", "_log_det")

    def __init__(self, bandwidth: np.ndarray, profile: KernelProfile = KernelProfile.GAUSSIAN):
        matrix = np.atleast_2d(np.array(bandwidth, dtype=float))
        if matrix.shape[0] != matrix.shape[1] or not np.all(np.isfinite(matrix)):
            raise SmoothingException(SmoothingErrorCode.SINGULAR_BANDWIDTH, f"розмір {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12):
            raise SmoothingException(SmoothingErrorCode.SINGULAR_BANDWIDTH, "H не симетрична")
        try:
            factor = np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError as e:
            raise SmoothingException(SmoothingErrorCode.SINGULAR_BANDWIDTH) from e
        self.profile = KernelProfile(profile)
        matrix.setflags(write=False)
        self.bandwidth = matrix
        self._inv = np.linalg.inv(matrix)
        self._log_det = 2.0 * float(np.sum(np.log(np.diag(factor))))

    @classmethod
    def isotropic(cls, h: float, dim: int) -> "KernelSpec":
        """H = h I_{D-1} для D-частинних композицій."""
        if not h > 0:
            raise SmoothingException(SmoothingErrorCode.SINGULAR_BANDWIDTH, f"h={h}")
        return cls(h * np.eye(dim - 1))

    @property
    def k(self) -> int:
        return self.bandwidth.shape[0]

    @property
    def det(self) -> float:
        return float(np.exp(self._log_det))

    def log_values(self, diffs: np.ndarray) -> np.ndarray:
        """log K~_H для рядків diffs = u* - x* (останній вимір - координати)."""
        scaled = diffs @ self._inv.T
        return (
            -0.5 * np.sum(scaled * scaled, axis=-1)
            - 0.5 * self.k * np.log(2.0 * np.pi)
            - self._log_det
        )

    def __repr__(self) -> str:
        return f"KernelSpec(profile={self.profile.value}, H={self.bandwidth.tolist()})"


class Dataset:
    """Вибірка (y_i, x_i) з кешованими ilr-образами коваріат."""

    __slots__ = ("covariates", "responses", "ilr_coords", "row_numbers")

    def __init__(
            self,
            covariates: np.ndarray,
            responses: Sequence[float],
            row_numbers: Optional[Sequence[int]] = None
    ):
        parts = np.atleast_2d(np.array(covariates, dtype=float))
        y = np.array(responses, dtype=float).ravel()
        if parts.shape[0] != y.size:
            raise SmoothingException(SmoothingErrorCode.LENGTH_MISMATCH, f"{parts.shape[0]} != {y.size}")
        if y.size < 1:
            raise SmoothingException(SmoothingErrorCode.LENGTH_MISMATCH, "порожня вибірка")
        if parts.shape[1] < 2:
            raise SmoothingException(SmoothingErrorCode.DIMENSION_TOO_SMALL, f"D={parts.shape[1]}")
        if np.any(parts <= 0.0) or not np.all(np.isfinite(parts)):
            raise SmoothingException(SmoothingErrorCode.NON_POSITIVE_PART)
        if not np.all(np.isfinite(y)):
            raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, "нескінченний відгук")
        sums = parts.sum(axis=1, keepdims=True)
        parts = np.where(np.abs(sums - 1.0) > 1e-10, parts / sums, parts)
        coords = ilr_rows(parts)
        rows = np.arange(1, y.size + 1) if row_numbers is None else np.asarray(row_numbers, dtype=int)
        for values in (parts, y, coords, rows):
            values.setflags(write=False)
        self.covariates = parts
        self.responses = y
        self.ilr_coords = coords
        self.row_numbers = rows

    @classmethod
    def from_points(cls, points: Sequence[SimplexPoint], responses: Sequence[float]) -> "Dataset":
        return cls(points_to_rows(points), responses)

    @property
    def n(self) -> int:
        return self.responses.size

    @property
    def dim(self) -> int:
        return self.covariates.shape[1]

    def point(self, i: int) -> SimplexPoint:
        return SimplexPoint(self.covariates[i])

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.covariates[idx], self.responses[idx], self.row_numbers[idx])

    def with_responses(self, responses: Sequence[float]) -> "Dataset":
        return Dataset(self.covariates, responses, self.row_numbers)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, D={self.dim})"


class WeightVector:
    """Невід'ємні ядрові ваги w_i(x)."""

    __slots__ = ("weights",)

    def __init__(self, weights: Sequence[float]):
        values = np.array(weights, dtype=float).ravel()
        if np.any(values < 0.0) or not np.all(np.isfinite(values)):
            raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, "ваги повинні бути скінченними та невід'ємними")
        values.setflags(write=False)
        self.weights = values

    def normalized(self) -> "WeightVector":
        total = self.weights.sum()
        if total <= 0.0:
            raise SmoothingException(SmoothingErrorCode.ALL_WEIGHTS_ZERO)
        return WeightVector(self.weights / total)

    def effective_neighbors(self) -> float:
        return effective_neighbors(self.weights)

    def __len__(self) -> int:
        return self.weights.size

    def __repr__(self) -> str:
        return f"WeightVector(n={self.weights.size})"


class LinearFit(NamedTuple):
    estimate: float
    slope: np.ndarray


@dataclass(frozen=True)
class SmootherFit:
    """Результат згладжувача в наборі точок запиту."""
    method: str
    bandwidth: float
    query_ilr: np.ndarray
    estimates: np.ndarray
    scale: np.ndarray
    converged: np.ndarray
    fallback: np.ndarray
    failed: np.ndarray
    residuals: Optional[np.ndarray] = None
    fitted: Optional[np.ndarray] = None
    messages: List[str] = field(default_factory=list)

    @property
    def n_failed(self) -> int:
        return int(np.count_nonzero(self.failed))

    @property
    def n_not_converged(self) -> int:
        return int(np.count_nonzero(~self.converged & ~self.failed))


def effective_neighbors(weights: np.ndarray) -> float:
    """Ефективна кількість сусідів за Кішем: (Σw)² / Σw²."""
    w = np.asarray(weights, dtype=float)
    denom = float(np.sum(w * w))
    return 0.0 if denom == 0.0 else float(np.sum(w) ** 2 / denom)


def _coords(x) -> np.ndarray:
    if isinstance(x, SimplexPoint):
        return ilr(x).coords
    if isinstance(x, IlrVector):
        return x.coords
    return np.asarray(x, dtype=float).ravel()


def kernel_value(spec: KernelSpec, u_star, x_star) -> float:
    """K~_H(u* - x*)."""
    u = _coords(u_star)
    x = _coords(x_star)
    if u.size != spec.k or x.size != spec.k:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"очікується довжина {spec.k}")
    return float(np.exp(spec.log_values(u - x)))


def kernel_matrix(spec: KernelSpec, data_ilr: np.ndarray, query_ilr: np.ndarray) -> np.ndarray:
    """Матриця значень ядра q x n для q точок запиту та n точок даних."""
    query = np.atleast_2d(query_ilr)
    if data_ilr.shape[1] != spec.k or query.shape[1] != spec.k:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"очікується {spec.k} координат ilr")
    diffs = data_ilr[None, :, :] - query[:, None, :]
    return np.exp(spec.log_values(diffs))


def weight_matrix(spec: KernelSpec, data_ilr: np.ndarray, query_ilr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Нормовані ваги для кожної точки запиту.

    :return: (W розміру q x n, булева маска рядків з ненульовою сумою).
    Рядки з нульовою сумою заповнюються NaN.
    """
    values = kernel_matrix(spec, data_ilr, query_ilr)
    totals = values.sum(axis=1)
    ok = totals > 0.0
    weights = np.full_like(values, np.nan)
    weights[ok] = values[ok] / totals[ok, None]
    return weights, ok


def kernel_weights(spec: KernelSpec, data: Dataset, x) -> WeightVector:
    """
    Ядрові ваги w_i(x) = K_H(x_i ⊖ x) / Σ_j K_H(x_j ⊖ x).

    :param spec: Ядро.
    :param data: Вибірка.
    :param x: Точка запиту (SimplexPoint, IlrVector або координати ilr).
    :return: Нормований WeightVector.
    """
    if isinstance(x, SimplexPoint) and x.dim != data.dim:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"{x.dim} != {data.dim}")
    weights, ok = weight_matrix(spec, data.ilr_coords, _coords(x))
    if not ok[0]:
        raise SmoothingException(SmoothingErrorCode.ALL_WEIGHTS_ZERO)
    return WeightVector(weights[0])


def conditional_cdf(weights: WeightVector, responses: Sequence[float], y: float) -> float:
    """F^(y|x) = Σ w_i 1{y_i <= y}."""
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    values = np.asarray(responses, dtype=float)
    return float(min(np.sum(w[values <= y]), 1.0))


def weighted_quantile(weights: WeightVector, responses: Sequence[float], q: float) -> float:
    """Найменше y_(k), для якого F^(y_(k)|x) >= q (без інтерполяції)."""
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    values = np.asarray(responses, dtype=float)
    order = np.argsort(values, kind="stable")
    cumulative = np.cumsum(w[order])
    k = int(np.searchsorted(cumulative, q - CDF_TOL, side="left"))
    return float(values[order][min(k, values.size - 1)])


def weighted_quantile_rows(weights: np.ndarray, responses: np.ndarray, q: float) -> np.ndarray:
    """weighted_quantile для кожного рядка матриці ваг q x n."""
    order = np.argsort(responses, kind="stable")
    sorted_values = responses[order]
    cumulative = np.cumsum(weights[:, order], axis=1)
    k = np.argmax(cumulative >= q - CDF_TOL, axis=1)
    return sorted_values[k]


def local_medians(spec: KernelSpec, data: Dataset, query_ilr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Локальні медіани m^_INI у точках запиту.

    :return: (медіани, маска точок з ненульовими вагами); для нульових - NaN.
    """
    weights, ok = weight_matrix(spec, data.ilr_coords, query_ilr)
    medians = np.full(weights.shape[0], np.nan)
    if np.any(ok):
        medians[ok] = weighted_quantile_rows(weights[ok], data.responses, 0.5)
    return medians, ok


def fit_local_constant_ls(spec: KernelSpec, data: Dataset, x) -> float:
    """Локально стала оцінка: зважене середнє Σ w_i(x) y_i."""
    weights = kernel_weights(spec, data, x)
    return float(np.dot(weights.weights, data.responses))


def design_matrix(data_ilr: np.ndarray, x_star: np.ndarray) -> np.ndarray:
    """Матриця плану з рядками (1, (x_i* - x*)^T)."""
    n = data_ilr.shape[0]
    return np.hstack([np.ones((n, 1)), data_ilr - x_star[None, :]])


def solve_weighted_normal_equations(design: np.ndarray, weights: np.ndarray, responses: np.ndarray) -> np.ndarray:
    """(X^T K X)^{-1} X^T K Y з перевіркою обумовленості."""
    weighted = design * weights[:, None]
    gram = weighted.T @ design
    try:
        cond = np.linalg.cond(gram)
    except np.linalg.LinAlgError as e:
        raise SmoothingException(SmoothingErrorCode.SINGULAR_DESIGN) from e
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise SmoothingException(SmoothingErrorCode.SINGULAR_DESIGN, f"cond={cond:.3g}")
    return np.linalg.solve(gram, weighted.T @ responses)


def fit_local_linear_ls(spec: KernelSpec, data: Dataset, x) -> LinearFit:
    """
    Локально лінійна оцінка m^(x) = i_1^T (X^T K X)^{-1} X^T K Y.

    :return: LinearFit(оцінка, нахил b1* довжини D-1).
    """
    x_star = _coords(x)
    weights = kernel_weights(spec, data, x_star)
    beta = solve_weighted_normal_equations(design_matrix(data.ilr_coords, x_star), weights.weights, data.responses)
    return LinearFit(float(beta[0]), beta[1:])


def fit_classical_surface(
        spec: KernelSpec,
        data: Dataset,
        query_ilr: np.ndarray,
        linear: bool,
        fallback_to_constant: bool = True,
        method: str = "cl",
        with_residuals: bool = False
) -> SmootherFit:
    """
    Класичний згладжувач у всіх точках запиту.

    Локально лінійна оцінка переходить у локально сталу, якщо ефективних
    сусідів менше за D або план вироджений (коли fallback_to_constant).
    """
    query = np.atleast_2d(query_ilr)
    estimates, fallback, failed, messages = _classical_at(
        spec, data, query, linear, fallback_to_constant
    )
    residuals = fitted = None
    if with_residuals:
        fitted, _, data_failed, _ = _classical_at(spec, data, data.ilr_coords, linear, fallback_to_constant)
        residuals = np.where(data_failed, np.nan, data.responses - fitted)
    return SmootherFit(
        method=method,
        bandwidth=float(spec.bandwidth[0, 0]),
        query_ilr=query,
        estimates=estimates,
        scale=np.full(query.shape[0], np.nan),
        converged=~failed,
        fallback=fallback,
        failed=failed,
        residuals=residuals,
        fitted=fitted,
        messages=messages,
    )


def _classical_at(spec, data, query, linear, fallback_to_constant):
    weights, ok = weight_matrix(spec, data.ilr_coords, query)
    q = query.shape[0]
    estimates = np.full(q, np.nan)
    fallback = np.zeros(q, dtype=bool)
    failed = ~ok
    messages = [f"точка {s}: {SmoothingErrorCode.ALL_WEIGHTS_ZERO.value}" for s in np.flatnonzero(~ok)]
    for s in np.flatnonzero(ok):
        w = weights[s]
        if linear and effective_neighbors(w) >= data.dim:
            try:
                beta = solve_weighted_normal_equations(design_matrix(data.ilr_coords, query[s]), w, data.responses)
                estimates[s] = beta[0]
                continue
            except SmoothingException as e:
                if not fallback_to_constant:
                    failed[s] = True
                    messages.append(f"точка {s}: {e.code}")
                    continue
        elif linear and not fallback_to_constant:
            failed[s] = True
            messages.append(f"точка {s}: {SmoothingErrorCode.SINGULAR_DESIGN.value}")
            continue
        fallback[s] = linear
        estimates[s] = float(np.dot(w, data.responses))
    return estimates, fallback, failed, messages
