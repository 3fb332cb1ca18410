from cli.commands.cv import CvCommand
from cli.commands.fit import FitCommand
from cli.commands.mc import McCommand
from cli.commands.predict import PredictCommand
from cli.commands.simulate import SimulateCommand

__all__ = ["CvCommand", "FitCommand", "McCommand", "PredictCommand", "SimulateCommand"]
