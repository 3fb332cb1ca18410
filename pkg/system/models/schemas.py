"""
Моделі конфігурації та перелічувані типи чисельного ядра.

Усі інваріанти типів перевіряються валідаторами pydantic, тож некоректна
конфігурація відхиляється ще до запуску обчислень.
"""

from enum import Enum
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, field_validator, model_validator

# Константи Тьюкі: Fisher-узгодженість S-масштабу та ефективність M-кроку
TUKEY_C0 = 1.54764
TUKEY_C1 = 4.685
S_SCALE_B = 0.5
DEFAULT_SD_CONTAM = 0.1


class RhoFamily(str, Enum):
    """Сімейства ρ-функцій."""
    TUKEY_BISQUARE = "tukey_bisquare"
    HUBER = "huber"
    HARD_REJECTION = "hard_rejection"


class ScaleKind(str, Enum):
    """Оцінки масштабу залишків."""
    LOCAL_MAD = "local_mad"
    LOCAL_S = "local_s"
    GLOBAL_S = "global_s"


class PolyDegree(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"


class ScaleMode(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


class Method(str, Enum):
    """Оцінювачі: класичні (CL) та робастні (ROB), локально сталі (0) та лінійні (1)."""
    CL0 = "cl0"
    CL1 = "cl1"
    ROB0 = "rob0"
    ROB1 = "rob1"

    @property
    def robust(self) -> bool:
        return self in (Method.ROB0, Method.ROB1)

    @property
    def degree(self) -> "PolyDegree":
        return PolyDegree.LINEAR if self in (Method.CL1, Method.ROB1) else PolyDegree.CONSTANT


class KernelProfile(str, Enum):
    GAUSSIAN = "gaussian"


class CvCriterion(str, Enum):
    LS_CV = "ls_cv"
    ROBUST_CV = "robust_cv"


class Location(str, Enum):
    MEDIAN = "median"


class Dispersion(str, Enum):
    MAD = "mad"
    TAU_SCALE = "tau_scale"
    S_SCALE = "s_scale"


class RhoSpec(BaseModel):
    """ρ-функція сімейства family з константою налаштування c."""
    model_config = ConfigDict(frozen=True)

    family: RhoFamily = RhoFamily.TUKEY_BISQUARE
    c: PositiveFloat = TUKEY_C1

    @property
    def bounded(self) -> bool:
        return self.family != RhoFamily.HUBER

    @property
    def sup(self) -> float:
        return 1.0 if self.bounded else float("inf")


class ScaleSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ScaleKind = ScaleKind.GLOBAL_S
    rho0: RhoSpec = RhoSpec(family=RhoFamily.TUKEY_BISQUARE, c=TUKEY_C0)
    b: PositiveFloat = S_SCALE_B

    @model_validator(mode="after")
    def check_target(self) -> "ScaleSpec":
        if not self.b < self.rho0.sup:
            raise ValueError(f"b={self.b} має бути меншим за sup ρ={self.rho0.sup}")
        return self


class MSmootherConfig(BaseModel):
    """Налаштування локального M-згладжувача."""
    model_config = ConfigDict(frozen=True)

    rho1: RhoSpec = RhoSpec(family=RhoFamily.TUKEY_BISQUARE, c=TUKEY_C1)
    scale: ScaleSpec = ScaleSpec()
    max_iter: PositiveInt = 100
    tol: PositiveFloat = 1e-8
    local_poly_degree: PolyDegree = PolyDegree.LINEAR

    @model_validator(mode="after")
    def check_tuning(self) -> "MSmootherConfig":
        if not self.rho1.c > self.scale.rho0.c:
            raise ValueError(f"потрібно c1 > c0, отримано c1={self.rho1.c}, c0={self.scale.rho0.c}")
        return self


class EstimatorConfig(BaseModel):
    """Оцінювач, що використовується у fit, cv та Монте-Карло."""
    model_config = ConfigDict(frozen=True)

    method: Method = Method.ROB1
    m_config: MSmootherConfig = MSmootherConfig()
    scale_mode: ScaleMode = ScaleMode.GLOBAL
    fallback_to_constant: bool = True

    @property
    def smoother(self) -> MSmootherConfig:
        """Налаштування M-згладжувача зі степенем полінома, узгодженим з method."""
        if self.m_config.local_poly_degree == self.method.degree:
            return self.m_config
        return self.m_config.model_copy(update={"local_poly_degree": self.method.degree})


class DirichletParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: List[PositiveFloat] = Field(min_length=2)

    @property
    def dim(self) -> int:
        return len(self.alpha)


class LogisticNormalParams(BaseModel):
    """Параметри логістично-нормального закону в координатах ilr."""
    model_config = ConfigDict(frozen=True)

    mu: List[float] = Field(min_length=1)
    sigma: List[List[float]]

    @model_validator(mode="after")
    def check_covariance(self) -> "LogisticNormalParams":
        sigma = np.asarray(self.sigma, dtype=float)
        k = len(self.mu)
        if sigma.shape != (k, k):
            raise ValueError(f"sigma повинна мати розмір {k}x{k}")
        if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-10):
            raise ValueError("sigma не симетрична")
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as e:
            raise ValueError("sigma не є додатно визначеною") from e
        return self

    @property
    def dim(self) -> int:
        return len(self.mu) + 1


class ErrorLaw(BaseModel):
    """Забруднений гауссів закон (1-δ)N(0,1) + δN(μ, sd²)."""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(default=0.0, ge=0.0, lt=1.0)
    mu_shift: float = 0.0
    sd_contam: PositiveFloat = DEFAULT_SD_CONTAM

    @property
    def label(self) -> str:
        if self.delta == 0.0:
            return "C0"
        return f"C1_{self.delta:g}_{self.mu_shift:g}"


class CvConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    grid: List[PositiveFloat] = Field(min_length=1)
    folds: Union[int, str] = 5
    criterion: CvCriterion = CvCriterion.ROBUST_CV
    location: Location = Location.MEDIAN
    dispersion: Dispersion = Dispersion.MAD
    seed: int = Field(default=0, ge=0)
    refine_step: Optional[PositiveFloat] = None
    refine_radius: Optional[PositiveFloat] = None

    @field_validator("grid")
    @classmethod
    def check_grid(cls, grid: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("сітка h повинна строго зростати")
        return grid

    @field_validator("folds")
    @classmethod
    def check_folds(cls, folds: Union[int, str]) -> Union[int, str]:
        if isinstance(folds, str):
            if folds.strip().lower() == "loo":
                return "loo"
            folds = int(folds)
        if folds < 2:
            raise ValueError("кількість фолдів K повинна бути >= 2")
        return folds


class McScenario(BaseModel):
    """Повний сценарій Монте-Карло."""
    model_config = ConfigDict(frozen=True)

    alpha: DirichletParams
    b_comp: List[PositiveFloat] = Field(default=[0.05920067, 0.7193872, 0.2214121], min_length=2)
    sigma: PositiveFloat = 1.0
    error_law: ErrorLaw = ErrorLaw()
    n: PositiveInt = 100
    n_reps: PositiveInt = 500
    n_pred: PositiveInt = 100
    bandwidth_h: Optional[PositiveFloat] = None
    estimators: List[Method] = [Method.CL0, Method.CL1, Method.ROB0, Method.ROB1]
    m_config: MSmootherConfig = MSmootherConfig()
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def check_dims(self) -> "McScenario":
        if len(self.b_comp) != self.alpha.dim:
            raise ValueError("b_comp та alpha повинні мати однакову розмірність")
        return self

    @property
    def h(self) -> float:
        if self.bandwidth_h is not None:
            return self.bandwidth_h
        return default_bandwidth(self.alpha.alpha)

    @property
    def label(self) -> str:
        alpha = "-".join(f"{a:g}" for a in self.alpha.alpha)
        return f"a{alpha}_{self.error_law.label}"


class GridSpec(BaseModel):
    """Рівномірна сітка в просторі ilr."""
    model_config = ConfigDict(frozen=True)

    lower: List[float] = Field(min_length=1)
    upper: List[float] = Field(min_length=1)
    step: Optional[List[PositiveFloat]] = None
    count: Optional[List[int]] = None

    @model_validator(mode="after")
    def check_axes(self) -> "GridSpec":
        k = len(self.lower)
        if len(self.upper) != k:
            raise ValueError("lower та upper повинні мати однакову довжину")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("на кожній осі потрібно lower < upper")
        if (self.step is None) == (self.count is None):
            raise ValueError("потрібно задати або step, або count")
        if self.step is not None and len(self.step) not in (1, k):
            raise ValueError("step задається один або для кожної осі")
        if self.count is not None:
            if len(self.count) not in (1, k):
                raise ValueError("count задається один або для кожної осі")
            if any(c < 2 for c in self.count):
                raise ValueError("на кожній осі потрібно щонайменше 2 точки")
        if self.step is not None:
            steps = self.step * k if len(self.step) == 1 else self.step
            if any(s > hi - lo + 1e-12 for s, lo, hi in zip(steps, self.lower, self.upper)):
                raise ValueError("крок більший за діапазон: на осі буде менше 2 точок")
        return self

    def axes(self) -> List[np.ndarray]:
        k = len(self.lower)
        result = []
        for j in range(k):
            lo, hi = self.lower[j], self.upper[j]
            if self.count is not None:
                count = self.count[0] if len(self.count) == 1 else self.count[j]
                result.append(np.linspace(lo, hi, count))
            else:
                step = self.step[0] if len(self.step) == 1 else self.step[j]
                # кількість точок з допуском на похибку округлення
                count = int(np.floor((hi - lo) / step + 1e-9)) + 1
                result.append(lo + step * np.arange(count))
        return result


def default_bandwidth(alpha: List[float]) -> float:
    """
    Правило вибору h для сценарію: H = 2I для α = (5,7,1), H = I для α = (5,7,4).

    Для інших α використовується H = I.
    """
    if list(alpha) == [5.0, 7.0, 1.0]:
        return 2.0
    return 1.0
