import argparse
import sys
from typing import Dict, List, Optional

from cli.commands import CvCommand, FitCommand, McCommand, PredictCommand, SimulateCommand
from cli.commands.base import BaseCommand
from system.exceptions import SmoothingErrorCode, SmoothingException
from system.models import CvCriterion, Dispersion, Method, ScaleMode

# Значення-списки, що можуть починатися з мінуса
LIST_OPTIONS = ("--grid", "--h-grid")


class ArgumentParser(argparse.ArgumentParser):
    """argparse, що повідомляє про помилки винятком замість sys.exit(2)."""

    def error(self, message):
        raise SmoothingException(SmoothingErrorCode.USAGE_ERROR, message)


class Router:
    def __init__(self):
        self.handlers: Dict[str, BaseCommand] = {}
        self.parser = ArgumentParser(
            prog="composit",
            description="Класична та робастна непараметрична регресія з композиційними коваріатами"
        )
        self.subparsers = self.parser.add_subparsers(dest="command", parser_class=ArgumentParser)
        self.setup_routes()

    def _add(self, handler: BaseCommand, help_text: str) -> argparse.ArgumentParser:
        """Реєстрація підкоманди зі спільними прапорцями --seed, --threads, --config."""
        parser = self.subparsers.add_parser(handler.name, help=help_text)
        parser.add_argument("--seed", type=int, default=None, help="базовий seed (64 біти)")
        parser.add_argument("--threads", type=int, default=None, help="кількість робочих процесів")
        parser.add_argument("--config", default=None, help="файл KEY=VALUE")
        self.handlers[handler.name] = handler
        return parser

    def setup_routes(self):
        """Реєстрація підкоманд"""
        methods = [m.value for m in Method]

        simulate = self._add(SimulateCommand(), "Згенерувати синтетичну вибірку")
        simulate.add_argument("--out", required=True)
        simulate.add_argument("--n", type=int, default=None)
        simulate.add_argument("--alpha", default=None, help="параметри Діріхле, напр. 5,7,1")
        simulate.add_argument("--contamination", default=None, help="delta:mu, напр. 0.1:10")
        simulate.add_argument("--replication", type=int, default=0)

        fit = self._add(FitCommand(), "Згладжування в точках даних та на сітці")
        fit.add_argument("--data", default=None)
        fit.add_argument("--out", required=True)
        fit.add_argument("--method", choices=methods, default=None)
        fit.add_argument("--h", type=float, default=None)
        fit.add_argument("--scale-mode", choices=[m.value for m in ScaleMode], default=None)
        fit.add_argument("--grid", default=None, help="lo1,hi1,...,loK,hiK,step")
        fit.add_argument("--drop-outliers", action="store_true")
        fit.add_argument("--save-config", default=None)

        cv = self._add(CvCommand(), "Вибір ширини вікна")
        cv.add_argument("--data", default=None)
        cv.add_argument("--out", required=True)
        cv.add_argument("--method", choices=methods, default=None)
        cv.add_argument("--h-grid", default=None, help="значення h через кому")
        cv.add_argument("--folds", default=None, help="K або loo")
        cv.add_argument("--criterion", choices=[c.value for c in CvCriterion], default=None)
        cv.add_argument("--dispersion", choices=[d.value for d in Dispersion], default=None)
        cv.add_argument("--refine-step", type=float, default=None)

        predict = self._add(PredictCommand(), "Прогноз збереженої конфігурації на сітці")
        predict.add_argument("--out", required=True)
        predict.add_argument("--grid", default=None)

        mc = self._add(McCommand(), "Експеримент Монте-Карло")
        mc.add_argument("--out", required=True, help="таблиця MISE/Bias²")
        mc.add_argument("--ise-out", default=None, help="ISE кожної реплікації")
        mc.add_argument("--reps", type=int, default=None)
        mc.add_argument("--alpha", default=None)
        mc.add_argument("--contamination", default=None, help="список delta:mu через кому")
        mc.add_argument("--h", type=float, default=None)

    def dispatch(self, argv: Optional[List[str]] = None) -> int:
        args = self.parser.parse_args(self.join_values(sys.argv[1:] if argv is None else argv))
        if args.command is None:
            raise SmoothingException(SmoothingErrorCode.USAGE_ERROR, "не вказано підкоманду")
        return self.handlers[args.command].run(args)

    @staticmethod
    def join_values(argv: List[str]) -> List[str]:
        """--grid -0.5,0.5,... -> --grid=-0.5,0.5,... (інакше argparse бачить у значенні прапорець)"""
        joined: List[str] = []
        i = 0
        while i < len(argv):
            if argv[i] in LIST_OPTIONS and i + 1 < len(argv):
                joined.append(f"{argv[i]}={argv[i + 1]}")
                i += 2
            else:
                joined.append(argv[i])
                i += 1
        return joined
