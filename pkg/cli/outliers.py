"""
Виявлення атипових спостережень за коробковою діаграмою залишків.

Квартилі обчислюються як медіани половин упорядкованої вибірки (шарніри
Тьюкі): для непарного n медіана входить до обох половин.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from system.exceptions import SmoothingErrorCode, SmoothingException

BOX_WHISKER = 1.5


@dataclass(frozen=True)
class OutlierReport:
    residuals: np.ndarray
    flagged: np.ndarray
    q1: float
    q3: float
    lower: float
    upper: float

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.flagged)

    @property
    def fences(self) -> Tuple[float, float]:
        return self.lower, self.upper

    @property
    def n_flagged(self) -> int:
        return int(np.count_nonzero(self.flagged))


def hinges(values: Sequence[float]) -> Tuple[float, float]:
    """(Q1, Q3) як медіани нижньої та верхньої половин."""
    ordered = np.sort(np.asarray(values, dtype=float))
    half = (ordered.size + 1) // 2
    return float(np.median(ordered[:half])), float(np.median(ordered[ordered.size - half:]))


def flag_outliers(residuals: Sequence[float]) -> OutlierReport:
    """
    Позначає залишки поза межами Q1 - 1.5 IQR та Q3 + 1.5 IQR.

    Відсутні залишки (NaN) не беруть участі в квартилях і не позначаються.
    """
    values = np.asarray(residuals, dtype=float)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        raise SmoothingException(SmoothingErrorCode.NO_FINITE_RESIDUALS, f"n={values.size}")
    q1, q3 = hinges(finite)
    iqr = q3 - q1
    lower, upper = q1 - BOX_WHISKER * iqr, q3 + BOX_WHISKER * iqr
    with np.errstate(invalid="ignore"):
        flagged = np.isfinite(values) & ((values < lower) | (values > upper))
    return OutlierReport(residuals=values, flagged=flagged, q1=q1, q3=q3, lower=lower, upper=upper)
