"""
Моделі конфігурації чисельного ядра.

Цей модуль містить усі перелічувані типи та схеми налаштувань.
"""

from .schemas import (
    DEFAULT_SD_CONTAM,
    S_SCALE_B,
    TUKEY_C0,
    TUKEY_C1,
    CvConfig,
    CvCriterion,
    DirichletParams,
    Dispersion,
    ErrorLaw,
    EstimatorConfig,
    GridSpec,
    KernelProfile,
    LogisticNormalParams,
    Location,
    McScenario,
    Method,
    MSmootherConfig,
    PolyDegree,
    RhoFamily,
    RhoSpec,
    ScaleKind,
    ScaleMode,
    ScaleSpec,
    default_bandwidth,
)

__all__ = [
    "DEFAULT_SD_CONTAM",
    "S_SCALE_B",
    "TUKEY_C0",
    "TUKEY_C1",
    "CvConfig",
    "CvCriterion",
    "DirichletParams",
    "Dispersion",
    "ErrorLaw",
    "EstimatorConfig",
    "GridSpec",
    "KernelProfile",
    "LogisticNormalParams",
    "Location",
    "McScenario",
    "Method",
    "MSmootherConfig",
    "PolyDegree",
    "RhoFamily",
    "RhoSpec",
    "ScaleKind",
    "ScaleMode",
    "ScaleSpec",
    "default_bandwidth",
]
