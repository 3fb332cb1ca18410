from argparse import Namespace
from typing import Any, Dict

from cli.response import Response
from cli.commands.base import BaseCommand
from system.mc_harness import generate_replication
from tools.csv_io import write_dataset


class SimulateCommand(BaseCommand):
    """Синтетична вибірка зі сценарію Монте-Карло (перший закон забруднення)."""

    name = "simulate"

    def overrides(self, args: Namespace) -> Dict[str, Any]:
        return {
            "MC_N": args.n,
            "MC_ALPHA": args.alpha,
            "MC_CONTAMINATION": args.contamination,
        }

    def run(self, args: Namespace) -> int:
        config = self.resolve_config(args)
        scenario = config.scenarios()[0]
        data, _ = generate_replication(scenario, args.replication)
        write_dataset(args.out, data, config.to_lines())
        return Response.success(
            data={"path": str(args.out), "n": data.n, "dim": data.dim, "scenario": scenario.label},
            message="Вибірку згенеровано"
        )
