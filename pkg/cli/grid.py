"""Сітки прогнозу, рівномірні в просторі ilr, та тернарні координати."""

from typing import List, Tuple

import numpy as np

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.models import GridSpec
from system.simplex_core import IlrVector, SimplexPoint, inv_ilr_rows

SQRT3_2 = np.sqrt(3.0) / 2.0


def grid_arrays(gs: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Декартів добуток осей: (ilr-координати q x (D-1), композиції q x D)."""
    axes = gs.axes()
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.column_stack([m.ravel() for m in mesh])
    return coords, inv_ilr_rows(coords)


def make_grid(gs: GridSpec) -> Tuple[List[IlrVector], List[SimplexPoint]]:
    coords, parts = grid_arrays(gs)
    return [IlrVector(c) for c in coords], [SimplexPoint(p) for p in parts]


def parse_grid(text: str) -> GridSpec:
    """
    "lo1,hi1,lo2,hi2,...,step" -> GridSpec зі спільним кроком.

    Приклад: "0,1,-0.3,1,0.05" задає [0,1] x [-0.3,1] з кроком 0.05.
    """
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise SmoothingException(SmoothingErrorCode.USAGE_ERROR, f"сітка '{text}'", key="--grid")
    if len(values) < 3 or len(values) % 2 == 0:
        raise SmoothingException(
            SmoothingErrorCode.USAGE_ERROR, "очікується lo1,hi1,...,loK,hiK,step", key="--grid"
        )
    bounds = values[:-1]
    return GridSpec(lower=bounds[0::2], upper=bounds[1::2], step=[values[-1]])


def ternary(parts: np.ndarray) -> np.ndarray:
    """
    Тернарні координати для D = 3: x = x2 + x3/2, y = (√3/2) x3.

    Вершини: (1,0,0) -> (0,0), (0,1,0) -> (1,0), (0,0,1) -> (1/2, √3/2).
    """
    parts = np.atleast_2d(parts)
    if parts.shape[1] != 3:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"D={parts.shape[1]}, потрібно 3")
    return np.column_stack([parts[:, 1] + 0.5 * parts[:, 2], SQRT3_2 * parts[:, 2]])
