from argparse import Namespace
from typing import Any, Dict

import numpy as np

from cli.commands.fit import fit_rows
from cli.grid import grid_arrays
from cli.response import Response
from cli.commands.base import BaseCommand
from system.exceptions import SmoothingErrorCode, SmoothingException
from system.robust_estimation import fit_estimator
from tools.csv_io import fit_header, write_table


class PredictCommand(BaseCommand):
    """Оцінка збереженої конфігурації fit на сітці."""

    name = "predict"

    def overrides(self, args: Namespace) -> Dict[str, Any]:
        return self.grid_overrides(args.grid)

    def run(self, args: Namespace) -> int:
        if args.config is None:
            raise SmoothingException(SmoothingErrorCode.USAGE_ERROR, "потрібна збережена конфігурація", key="--config")
        config = self.resolve_config(args)
        gs = config.grid_spec()
        if gs is None:
            raise SmoothingException(SmoothingErrorCode.USAGE_ERROR, "не задано сітку", key="--grid")
        data = self.load_data(config)
        coords, parts = grid_arrays(gs)
        if parts.shape[1] != data.dim:
            raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"сітка D={parts.shape[1]}, дані D={data.dim}")
        fit = fit_estimator(data, coords, config.h, config.estimator(), threads=config.threads)
        ternary = data.dim == 3
        write_table(args.out, fit_header(data.dim, False, ternary), fit_rows(parts, fit, None), config.to_lines())
        return Response.success(
            data={
                "path": str(args.out),
                "points": int(coords.shape[0]),
                "failed": fit.n_failed,
                "not_converged": fit.n_not_converged,
                "mean_estimate": float(np.nanmean(fit.estimates)) if fit.n_failed < coords.shape[0] else None,
            },
            message="Прогноз обчислено"
        )
