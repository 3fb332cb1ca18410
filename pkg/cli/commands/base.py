from argparse import Namespace
from typing import Any, Dict, Optional

from cli.grid import parse_grid
from system.exceptions import SmoothingErrorCode, SmoothingException
from system.kernel_smoothing import Dataset
from tools.config import Config, RunConfig, RunConfigLoader
from tools.csv_io import read_dataset
from tools.logger import Logger


class BaseCommand:
    """Спільна логіка підкоманд: розв'язання конфігурації та читання даних."""

    name = ""

    def __init__(self):
        self.logger = Logger()

    def overrides(self, args: Namespace) -> Dict[str, Any]:
        """Прапорці командного рядка у вигляді ключів RunConfig."""
        return {}

    def resolve_config(self, args: Namespace) -> RunConfig:
        env = Config()
        self.logger.set_level(env.LOG_LEVEL)
        cli = {"SEED": args.seed, "THREADS": args.threads}
        cli.update(self.overrides(args))
        config = RunConfig.resolve(RunConfigLoader.load(args.config), env, cli)
        self.logger.info(f"⚙️ {self.name}: " + "; ".join(config.to_lines()))
        return config

    @staticmethod
    def grid_overrides(text: Optional[str]) -> Dict[str, Any]:
        if text is None:
            return {}
        gs = parse_grid(text)
        return {"GRID_LOWER": gs.lower, "GRID_UPPER": gs.upper, "GRID_STEP": gs.step}

    @staticmethod
    def load_data(config: RunConfig) -> Dataset:
        if not config.data_path:
            raise SmoothingException(SmoothingErrorCode.USAGE_ERROR, "не задано файл даних", key="--data")
        return read_dataset(config.data_path)

    def run(self, args: Namespace) -> int:
        raise NotImplementedError
