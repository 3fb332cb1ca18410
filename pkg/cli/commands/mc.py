from argparse import Namespace
from typing import Any, Dict

from cli.commands.base import BaseCommand
from cli.response import Response
from system.mc_harness import run_table
from tools.csv_io import sibling_path, write_ise_long, write_mc_reports


class McCommand(BaseCommand):
    """Експеримент Монте-Карло: таблиця MISE та Bias² для всіх законів похибок."""

    name = "mc"

    def overrides(self, args: Namespace) -> Dict[str, Any]:
        return {
            "MC_REPS": args.reps,
            "MC_ALPHA": args.alpha,
            "MC_CONTAMINATION": args.contamination,
            "MC_H": args.h,
        }

    def run(self, args: Namespace) -> int:
        config = self.resolve_config(args)
        reports = run_table(config.scenarios(), threads=config.threads)
        echo = config.to_lines()
        ise_path = args.ise_out or sibling_path(args.out, "ise")
        write_mc_reports(args.out, reports, echo)
        write_ise_long(ise_path, reports, echo)
        for report in reports:
            report.ensure_reproducible()
        return Response.success(
            data={
                "path": str(args.out),
                "ise_path": str(ise_path),
                "scenarios": [r.scenario for r in reports],
                "mise": {r.scenario: r.mise for r in reports},
            },
            message="Експеримент завершено"
        )
