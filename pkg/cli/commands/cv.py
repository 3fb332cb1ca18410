from argparse import Namespace
from typing import Any, Dict

from cli.commands.base import BaseCommand
from cli.response import Response
from system.bandwidth_selection import select_bandwidth
from tools.csv_io import write_cv_result


class CvCommand(BaseCommand):
    """Вибір ширини вікна крос-валідацією."""

    name = "cv"

    def overrides(self, args: Namespace) -> Dict[str, Any]:
        return {
            "DATA_PATH": args.data,
            "METHOD": args.method,
            "CV_GRID": args.h_grid,
            "CV_FOLDS": args.folds,
            "CV_CRITERION": args.criterion,
            "CV_DISPERSION": args.dispersion,
            "CV_REFINE_STEP": args.refine_step,
        }

    def run(self, args: Namespace) -> int:
        config = self.resolve_config(args)
        data = self.load_data(config)
        result = select_bandwidth(data, config.cv_config(), config.estimator(), threads=config.threads)
        write_cv_result(args.out, result, config.to_lines() + [f"CHOSEN_H={result.chosen_h!r}"])
        return Response.success(
            data={
                "path": str(args.out),
                "chosen_h": result.chosen_h,
                "criterion": result.criterion,
                "partition_sha256": result.partition_hash,
                "excluded": int(result.excluded.sum()),
            },
            message="Ширину вікна обрано"
        )
