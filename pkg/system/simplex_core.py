"""
Геометрія Ейчісона на симплексі та логарифмічні відношення alr, clr, ilr.

Усі значення незмінні після створення, усі операції є чистими функціями.
Базис ilr один і фіксований: опорний (pivot) базис

    u*_j = sqrt(j/(j+1)) * log(g_j(u_1..u_j) / u_{j+1}),  j = 1..D-1,

де g_j - середнє геометричне перших j компонент.
"""

from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from system.exceptions import SmoothingErrorCode, SmoothingException

CLOSURE_TOL = 1e-10
HYPERPLANE_TOL = 1e-8
TINY = np.finfo(float).tiny

ArrayLike = Union[Sequence[float], np.ndarray]


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


def _close_logs(logs: np.ndarray) -> np.ndarray:
    """exp та замикання рядків логарифмів; частини не менші за найменше нормальне число."""
    values = np.maximum(np.exp(logs - logs.max(axis=-1, keepdims=True)), TINY)
    return np.maximum(values / values.sum(axis=-1, keepdims=True), TINY)


class SimplexPoint:
    """Композиція з D строго додатних частин, що сумуються в 1."""

    __slots__ = ("_parts",)

    def __init__(self, parts: ArrayLike):
        values = np.array(parts, dtype=float).ravel()
        if values.size < 2:
            raise SmoothingException(SmoothingErrorCode.DIMENSION_TOO_SMALL, f"D={values.size}")
        if not np.all(np.isfinite(values)):
            raise SmoothingException(SmoothingErrorCode.NON_POSITIVE_PART, "нескінченна компонента")
        if np.any(values <= 0.0):
            raise SmoothingException(
                SmoothingErrorCode.NON_POSITIVE_PART,
                f"компонента {int(np.argmin(values)) + 1}"
            )
        total = values.sum()
        # Вхід, що вже замкнений з допуском, зберігається побітово
        if abs(total - 1.0) > CLOSURE_TOL:
            values = values / total
        self._parts = _frozen(values)

    @classmethod
    def neutral(cls, dim: int) -> "SimplexPoint":
        """Нейтральний елемент e = (1/D, ..., 1/D)."""
        if dim < 2:
            raise SmoothingException(SmoothingErrorCode.DIMENSION_TOO_SMALL, f"D={dim}")
        return cls(np.full(dim, 1.0 / dim))

    @property
    def parts(self) -> np.ndarray:
        return self._parts

    @property
    def dim(self) -> int:
        return self._parts.size

    def __len__(self) -> int:
        return self._parts.size

    def __iter__(self):
        return iter(self._parts.tolist())

    def __getitem__(self, index):
        return self._parts[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplexPoint):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self._parts, other._parts))

    def __hash__(self) -> int:
        return hash(self._parts.tobytes())

    def __repr__(self) -> str:
        return f"SimplexPoint({self._parts.tolist()})"

    def to_list(self) -> list:
        return self._parts.tolist()


class IlrVector:
    """Координати композиції в опорному базисі ilr (довжина D-1)."""

    __slots__ = ("_coords",)

    def __init__(self, coords: ArrayLike):
        values = np.array(coords, dtype=float).ravel()
        if values.size < 1:
            raise SmoothingException(SmoothingErrorCode.DIMENSION_TOO_SMALL, "порожній вектор ilr")
        if not np.all(np.isfinite(values)):
            raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, "нескінченна координата ilr")
        self._coords = _frozen(values)

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def dim(self) -> int:
        """Розмірність симплекса D, якому відповідає вектор."""
        return self._coords.size + 1

    def __len__(self) -> int:
        return self._coords.size

    def __iter__(self):
        return iter(self._coords.tolist())

    def __getitem__(self, index):
        return self._coords[index]

    def __repr__(self) -> str:
        return f"IlrVector({self._coords.tolist()})"


class ContrastMatrix:
    """Матриця контрастів U розміру D x (D-1): ilr(x) = U^T log(x)."""

    __slots__ = ("_entries",)

    def __init__(self, entries: np.ndarray):
        self._entries = _frozen(np.array(entries, dtype=float))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __repr__(self) -> str:
        return f"ContrastMatrix(D={self.dim})"


def _check_same_dim(x: SimplexPoint, y: SimplexPoint):
    if x.dim != y.dim:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"{x.dim} != {y.dim}")


def closure(raw: ArrayLike) -> SimplexPoint:
    """
    Оператор замикання C(z) = z / sum(z).

    :param raw: D додатних чисел.
    :return: Композиція.
    """
    values = np.array(raw, dtype=float).ravel()
    if values.size < 2:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_TOO_SMALL, f"D={values.size}")
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise SmoothingException(SmoothingErrorCode.NON_POSITIVE_PART)
    return SimplexPoint(values / values.sum())


def perturb(x: SimplexPoint, y: SimplexPoint) -> SimplexPoint:
    """Пертурбація x ⊕ y."""
    _check_same_dim(x, y)
    return closure(np.maximum(x.parts * y.parts, TINY))


def power(alpha: float, x: SimplexPoint) -> SimplexPoint:
    """Степенування alpha ⊙ x."""
    if not np.isfinite(alpha):
        raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, "alpha має бути скінченним")
    # У логарифмах, щоб уникнути переповнення для великих |alpha|
    logs = alpha * np.log(x.parts)
    return SimplexPoint(_close_logs(logs))


def inverse(x: SimplexPoint) -> SimplexPoint:
    """Протилежний елемент C(1/x_1, ..., 1/x_D)."""
    return SimplexPoint(_close_logs(-np.log(x.parts)))


def perturb_diff(x: SimplexPoint, y: SimplexPoint) -> SimplexPoint:
    """Різницева пертурбація x ⊖ y = x ⊕ ((-1) ⊙ y)."""
    _check_same_dim(x, y)
    return perturb(x, power(-1.0, y))


def clr(x: SimplexPoint) -> np.ndarray:
    """Центроване логарифмічне відношення clr_j = log(x_j / g_D(x))."""
    logs = np.log(x.parts)
    return logs - logs.mean()


def inv_clr(v: ArrayLike) -> SimplexPoint:
    values = np.asarray(v, dtype=float).ravel()
    if abs(values.sum()) > HYPERPLANE_TOL:
        raise SmoothingException(SmoothingErrorCode.NOT_IN_HYPERPLANE, f"сума = {values.sum():.3g}")
    return SimplexPoint(_close_logs(values))


def aitchison_inner(x: SimplexPoint, y: SimplexPoint) -> float:
    """Скалярний добуток Ейчісона через clr."""
    _check_same_dim(x, y)
    return float(np.dot(clr(x), clr(y)))


def aitchison_inner_pairwise(x: SimplexPoint, y: SimplexPoint) -> float:
    """Та сама величина у формі подвійної суми по парах i < j, поділеної на D."""
    _check_same_dim(x, y)
    lx = np.log(x.parts)
    ly = np.log(y.parts)
    i, j = np.triu_indices(x.dim, k=1)
    return float(np.sum((lx[i] - lx[j]) * (ly[i] - ly[j])) / x.dim)


def aitchison_norm(x: SimplexPoint) -> float:
    return float(np.sqrt(max(aitchison_inner(x, x), 0.0)))


def aitchison_dist(x: SimplexPoint, y: SimplexPoint) -> float:
    """d_a(x, y) = ||x ⊖ y||_a."""
    _check_same_dim(x, y)
    return float(np.linalg.norm(clr(x) - clr(y)))


def alr(x: SimplexPoint) -> np.ndarray:
    """Адитивне логарифмічне відношення alr_j = log(x_j / x_D)."""
    logs = np.log(x.parts)
    return logs[:-1] - logs[-1]


def inv_alr(v: ArrayLike) -> SimplexPoint:
    values = np.append(np.asarray(v, dtype=float).ravel(), 0.0)
    return SimplexPoint(_close_logs(values))


@lru_cache(maxsize=64)
def _pivot_entries(dim: int) -> np.ndarray:
    entries = np.zeros((dim, dim - 1))
    for j in range(1, dim):
        entries[:j, j - 1] = 1.0 / np.sqrt(j * (j + 1.0))
        entries[j, j - 1] = -np.sqrt(j / (j + 1.0))
    return _frozen(entries)


def pivot_contrast_matrix(dim: int) -> ContrastMatrix:
    """
    Матриця контрастів опорного базису.

    :param dim: Кількість частин D >= 2.
    :return: U, для якої U^T U = I_{D-1} та U U^T = I_D - (1/D) 1 1^T.
    """
    if dim < 2:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_TOO_SMALL, f"D={dim}")
    return ContrastMatrix(_pivot_entries(dim))


def ilr(x: SimplexPoint) -> IlrVector:
    return IlrVector(_pivot_entries(x.dim).T @ clr(x))


def inv_ilr(v: Union[IlrVector, ArrayLike]) -> SimplexPoint:
    coords = v.coords if isinstance(v, IlrVector) else np.asarray(v, dtype=float).ravel()
    logs = _pivot_entries(coords.size + 1) @ coords
    return SimplexPoint(_close_logs(logs))


# Пакетні форми для n x D масивів (рядок = композиція)

def closure_rows(raw: np.ndarray) -> np.ndarray:
    values = np.atleast_2d(np.asarray(raw, dtype=float))
    if values.shape[1] < 2:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_TOO_SMALL, f"D={values.shape[1]}")
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise SmoothingException(SmoothingErrorCode.NON_POSITIVE_PART)
    return values / values.sum(axis=1, keepdims=True)


def clr_rows(parts: np.ndarray) -> np.ndarray:
    logs = np.log(np.atleast_2d(parts))
    return logs - logs.mean(axis=1, keepdims=True)


def ilr_rows(parts: np.ndarray) -> np.ndarray:
    """ilr для кожного рядка n x D масиву; результат n x (D-1)."""
    parts = np.atleast_2d(parts)
    return clr_rows(parts) @ _pivot_entries(parts.shape[1])


def inv_ilr_rows(coords: np.ndarray) -> np.ndarray:
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    logs = coords @ _pivot_entries(coords.shape[1] + 1).T
    return _close_logs(logs)


def points_to_rows(points: Iterable[SimplexPoint]) -> np.ndarray:
    points = list(points)
    if not points:
        return np.empty((0, 0))
    dim = points[0].dim
    for p in points:
        if p.dim != dim:
            raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"{p.dim} != {dim}")
    return np.vstack([p.parts for p in points])
