import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, field_validator

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.models import (
    TUKEY_C0,
    TUKEY_C1,
    S_SCALE_B,
    DEFAULT_SD_CONTAM,
    CvConfig,
    CvCriterion,
    Dispersion,
    DirichletParams,
    ErrorLaw,
    EstimatorConfig,
    GridSpec,
    McScenario,
    Method,
    MSmootherConfig,
    RhoFamily,
    RhoSpec,
    ScaleKind,
    ScaleMode,
    ScaleSpec,
)

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240101
# Кількість процесів не впливає на результат і не потрапляє у вихідні файли
NOT_ECHOED = frozenset({"threads"})


class ConfigError(SmoothingException):
    """Виняток для помилок конфігурації"""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(SmoothingErrorCode.CONFIG_ERROR, message, key=key)


class Config:
    def __init__(self):
        # Завантаження змінних з кореневого .env файлу проекту
        load_dotenv()

        self.LOG_LEVEL = os.getenv("COMPOSIT_LOG_LEVEL", "INFO").upper()  # рівень логування
        self.LOG_DIR = os.getenv("COMPOSIT_LOG_DIR")  # каталог файлових логів, опціонально
        self.THREADS = self._int_var("COMPOSIT_THREADS", 1, minimum=1)  # кількість робочих процесів
        self.SEED = self._int_var("COMPOSIT_SEED", DEFAULT_SEED, minimum=0)  # базовий seed

        if self.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigError(f"невідомий рівень {self.LOG_LEVEL}", key="COMPOSIT_LOG_LEVEL")

    @staticmethod
    def _int_var(name: str, default: int, minimum: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"очікується ціле число, отримано '{raw}'", key=name)
        if value < minimum:
            raise ConfigError(f"значення повинно бути >= {minimum}", key=name)
        return value

    def overrides(self) -> Dict[str, Any]:
        """Змінні оточення, що перекривають файл конфігурації (лише явно задані)."""
        result = {}
        if os.getenv("COMPOSIT_THREADS"):
            result["THREADS"] = self.THREADS
        if os.getenv("COMPOSIT_SEED"):
            result["SEED"] = self.SEED
        return result


def _split(value: Any) -> Any:
    if isinstance(value, str):
        items = [item.strip() for item in value.split(",")]
        return [item for item in items if item]
    return value


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    if isinstance(value, (list, tuple)):
        return ",".join(_format(item) for item in value)
    return str(value)


class RunConfig(BaseModel):
    """
    Плаский документ KEY=VALUE, що описує запуск будь-якої підкоманди.

    Ключі у файлі записуються у верхньому регістрі; невідомі ключі
    відхиляються. Списки задаються через кому, закони забруднення - як
    delta:mu, наприклад MC_CONTAMINATION=0:0,0.1:10,0.1:5.
    """
    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        alias_generator=str.upper,
        populate_by_name=True,
    )

    schema_version: int = SCHEMA_VERSION
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2 ** 64)
    threads: PositiveInt = 1

    # Оцінювач
    data_path: Optional[str] = None
    method: Method = Method.ROB1
    h: PositiveFloat = 1.0
    scale_mode: ScaleMode = ScaleMode.GLOBAL
    scale_kind: ScaleKind = ScaleKind.GLOBAL_S
    rho1_family: RhoFamily = RhoFamily.TUKEY_BISQUARE
    rho1_c: PositiveFloat = TUKEY_C1
    rho0_c: PositiveFloat = TUKEY_C0
    s_b: PositiveFloat = S_SCALE_B
    max_iter: PositiveInt = 100
    tol: PositiveFloat = 1e-8
    fallback_to_constant: bool = True
    drop_outliers: bool = False

    # Сітка прогнозу в ilr
    grid_lower: Optional[List[float]] = None
    grid_upper: Optional[List[float]] = None
    grid_step: Optional[List[PositiveFloat]] = None
    grid_count: Optional[List[int]] = None

    # Крос-валідація
    cv_grid: List[PositiveFloat] = [0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0]
    cv_folds: str = "5"
    cv_criterion: CvCriterion = CvCriterion.ROBUST_CV
    cv_dispersion: Dispersion = Dispersion.MAD
    cv_refine_step: Optional[PositiveFloat] = None
    cv_refine_radius: Optional[PositiveFloat] = None

    # Монте-Карло та simulate
    mc_alpha: List[PositiveFloat] = [5.0, 7.0, 1.0]
    mc_b: List[PositiveFloat] = [0.05920067, 0.7193872, 0.2214121]
    mc_sigma: PositiveFloat = 1.0
    mc_n: PositiveInt = 100
    mc_reps: PositiveInt = 500
    mc_pred: PositiveInt = 100
    mc_h: Optional[PositiveFloat] = None
    mc_estimators: List[Method] = [Method.CL0, Method.CL1, Method.ROB0, Method.ROB1]
    mc_contamination: List[str] = ["0:0"]
    mc_sd_contam: PositiveFloat = DEFAULT_SD_CONTAM

    @field_validator(
        "grid_lower", "grid_upper", "grid_step", "grid_count", "cv_grid",
        "mc_alpha", "mc_b", "mc_estimators", "mc_contamination",
        mode="before",
    )
    @classmethod
    def split_lists(cls, value: Any) -> Any:
        return _split(value)

    @field_validator("cv_folds", mode="before")
    @classmethod
    def check_folds(cls, value: Any) -> str:
        text = str(value).strip().lower()
        if text != "loo" and not (text.isdigit() and int(text) >= 2):
            raise ValueError("очікується ціле K >= 2 або 'loo'")
        return text

    @field_validator("mc_contamination")
    @classmethod
    def check_contamination(cls, value: List[str]) -> List[str]:
        for item in value:
            _parse_law(item, DEFAULT_SD_CONTAM)
        return value

    @field_validator("schema_version")
    @classmethod
    def check_schema(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"підтримується лише SCHEMA_VERSION={SCHEMA_VERSION}")
        return value

    @classmethod
    def resolve(
            cls,
            file_values: Optional[Dict[str, Any]] = None,
            env: Optional[Config] = None,
            cli: Optional[Dict[str, Any]] = None
    ) -> "RunConfig":
        """Типові значення < файл < оточення (THREADS, SEED) < прапорці командного рядка."""
        merged: Dict[str, Any] = {}
        merged.update(file_values or {})
        if env is not None:
            merged.update(env.overrides())
        merged.update({k.upper(): v for k, v in (cli or {}).items() if v is not None})
        try:
            return cls.model_validate(merged)
        except ValidationError as e:
            error = e.errors()[0]
            key = ".".join(str(part) for part in error["loc"]) if error["loc"] else None
            raise ConfigError(error["msg"], key=key)

    def to_lines(self) -> List[str]:
        """Конфігурація як рядки KEY=VALUE (None та поля з NOT_ECHOED пропускаються)."""
        lines = []
        for name in type(self).model_fields:
            value = getattr(self, name)
            if value is None or name in NOT_ECHOED:
                continue
            lines.append(f"{name.upper()}={_format(value)}")
        return lines

    def m_config(self) -> MSmootherConfig:
        return MSmootherConfig(
            rho1=RhoSpec(family=self.rho1_family, c=self.rho1_c),
            scale=ScaleSpec(kind=self.scale_kind, rho0=RhoSpec(family=RhoFamily.TUKEY_BISQUARE, c=self.rho0_c), b=self.s_b),
            max_iter=self.max_iter,
            tol=self.tol,
            local_poly_degree=self.method.degree,
        )

    def estimator(self, method: Optional[Method] = None) -> EstimatorConfig:
        return EstimatorConfig(
            method=method or self.method,
            m_config=self.m_config(),
            scale_mode=self.scale_mode,
            fallback_to_constant=self.fallback_to_constant,
        )

    def cv_config(self) -> CvConfig:
        return CvConfig(
            grid=self.cv_grid,
            folds=self.cv_folds,
            criterion=self.cv_criterion,
            dispersion=self.cv_dispersion,
            seed=self.seed,
            refine_step=self.cv_refine_step,
            refine_radius=self.cv_refine_radius,
        )

    def grid_spec(self) -> Optional[GridSpec]:
        if self.grid_lower is None and self.grid_upper is None:
            return None
        if self.grid_lower is None or self.grid_upper is None:
            raise ConfigError("потрібні обидві межі сітки", key="GRID_LOWER")
        return GridSpec(lower=self.grid_lower, upper=self.grid_upper, step=self.grid_step, count=self.grid_count)

    def error_laws(self) -> List[ErrorLaw]:
        return [_parse_law(item, self.mc_sd_contam) for item in self.mc_contamination]

    def scenarios(self) -> List[McScenario]:
        """Один сценарій на кожен закон забруднення з MC_CONTAMINATION."""
        return [
            McScenario(
                alpha=DirichletParams(alpha=self.mc_alpha),
                b_comp=self.mc_b,
                sigma=self.mc_sigma,
                error_law=law,
                n=self.mc_n,
                n_reps=self.mc_reps,
                n_pred=self.mc_pred,
                bandwidth_h=self.mc_h,
                estimators=self.mc_estimators,
                m_config=self.m_config(),
                seed=self.seed,
            )
            for law in self.error_laws()
        ]


def _parse_law(item: str, sd_contam: float) -> ErrorLaw:
    try:
        delta, mu = (float(part) for part in item.split(":"))
    except ValueError:
        raise ValueError(f"закон забруднення '{item}' повинен мати вигляд delta:mu")
    return ErrorLaw(delta=delta, mu_shift=mu, sd_contam=sd_contam)


class RunConfigLoader:
    """Читання файлів конфігурації запуску (--config)."""

    @staticmethod
    def load(path: Optional[str]) -> Dict[str, Any]:
        if path is None:
            return {}
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"файл {path} не знайдено", key="--config")
        values = dotenv_values(file_path, interpolate=False)
        if "SCHEMA_VERSION" not in values:
            raise ConfigError("відсутній SCHEMA_VERSION", key="SCHEMA_VERSION")
        for key, value in values.items():
            if value is None:
                raise ConfigError("ключ без значення", key=key)
        return dict(values)
