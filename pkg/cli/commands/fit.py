from argparse import Namespace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from cli.commands.base import BaseCommand
from cli.grid import grid_arrays, ternary
from cli.outliers import flag_outliers
from cli.response import Response
from system.kernel_smoothing import SmootherFit
from system.models import Method, PolyDegree
from system.robust_estimation import fit_estimator
from system.simplex_core import ilr_rows
from tools.csv_io import fit_header, sibling_path, write_table


def fit_rows(parts: np.ndarray, fit: SmootherFit, residuals: Optional[np.ndarray]) -> List[list]:
    """Рядки результату у порядку fit_header."""
    coords = ilr_rows(parts)
    tern = ternary(parts) if parts.shape[1] == 3 else None
    rows = []
    for s in range(parts.shape[0]):
        row = [s + 1] + parts[s].tolist() + coords[s].tolist()
        if tern is not None:
            row += tern[s].tolist()
        row.append(float(fit.estimates[s]))
        if residuals is not None:
            row.append(float(residuals[s]))
        row.append(bool(fit.converged[s]))
        rows.append(row)
    return rows


class FitCommand(BaseCommand):
    """Згладжування в точках даних і, за потреби, на сітці; звіт про атипові залишки."""

    name = "fit"

    def overrides(self, args: Namespace) -> Dict[str, Any]:
        values = {
            "DATA_PATH": args.data,
            "METHOD": args.method,
            "H": args.h,
            "SCALE_MODE": args.scale_mode,
            "DROP_OUTLIERS": True if args.drop_outliers else None,
        }
        values.update(self.grid_overrides(args.grid))
        return values

    def run(self, args: Namespace) -> int:
        config = self.resolve_config(args)
        data = self.load_data(config)
        estimator = config.estimator()
        ternary_columns = data.dim == 3
        echo = config.to_lines()

        at_data = fit_estimator(data, data.ilr_coords, config.h, estimator, threads=config.threads)
        residuals = np.where(at_data.failed, np.nan, data.responses - at_data.estimates)
        write_table(
            args.out,
            fit_header(data.dim, True, ternary_columns),
            fit_rows(data.covariates, at_data, residuals),
            echo
        )
        summary = {
            "path": str(args.out),
            "method": config.method.value,
            "h": config.h,
            "failed": at_data.n_failed,
            "not_converged": at_data.n_not_converged,
            "fallback": int(np.count_nonzero(at_data.fallback)),
        }

        gs = config.grid_spec()
        grid = None
        if gs is not None:
            grid = grid_arrays(gs)
            at_grid = fit_estimator(data, grid[0], config.h, estimator, threads=config.threads)
            grid_path = sibling_path(args.out, "grid")
            write_table(grid_path, fit_header(data.dim, False, ternary_columns), fit_rows(grid[1], at_grid, None), echo)
            summary["grid_path"] = str(grid_path)
            summary["grid_points"] = int(grid[0].shape[0])

        report = flag_outliers(residuals)
        outliers_path = sibling_path(args.out, "outliers")
        write_table(
            outliers_path,
            ["point_id", "row", "residual", "flagged"],
            (
                [i + 1, int(data.row_numbers[i]), float(report.residuals[i]), bool(report.flagged[i])]
                for i in range(data.n)
            ),
            echo + [f"Q1={report.q1!r}", f"Q3={report.q3!r}", f"LOWER_FENCE={report.lower!r}", f"UPPER_FENCE={report.upper!r}"]
        )
        self.logger.info(f"🔎 Атипових спостережень: {report.n_flagged} з {data.n}")
        summary.update({"outliers_path": str(outliers_path), "n_flagged": report.n_flagged, "fences": report.fences})

        if config.drop_outliers:
            summary["clean_path"] = str(self._refit_without(config, data, report.flagged, grid, args.out, echo))

        if args.save_config:
            Path(args.save_config).write_text("\n".join(echo) + "\n", encoding="utf-8")
            summary["config_path"] = str(args.save_config)

        return Response.success(data=summary, message="Згладжування виконано")

    def _refit_without(self, config, data, flagged, grid, out, echo) -> Path:
        """Класичний згладжувач того ж степеня без позначених спостережень."""
        method = Method.CL1 if config.method.degree == PolyDegree.LINEAR else Method.CL0
        clean = data.subset(np.flatnonzero(~flagged))
        parts = grid[1] if grid is not None else clean.covariates
        fit = fit_estimator(clean, ilr_rows(parts), config.h, config.estimator(method), threads=config.threads)
        path = sibling_path(out, "clean")
        write_table(path, fit_header(data.dim, False, data.dim == 3), fit_rows(parts, fit, None), echo)
        self.logger.info(f"🧹 {method.value} без {int(np.count_nonzero(flagged))} спостережень: {path}")
        return path
