"""Kinetic exchange market models.

Gas-like Monte Carlo models of money and wealth exchange between agents:
trade kernels, saving-propensity distributions, a reproducible ensemble
simulation engine, heavy-tail and Gamma-form analysis, and closed-form
steady-state predictions to check the simulations against.
"""

from . import analysis, engine, kernels, lambda_dist, theory
from .engine import SimConfig, SimResult, run, select_pair, track_richest
from .errors import (
    ConfigError,
    ContractError,
    FitError,
    KinexchError,
    SimulationError,
)
from .lambda_dist import LambdaDistSpec

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "engine",
    "kernels",
    "lambda_dist",
    "theory",
    "SimConfig",
    "SimResult",
    "run",
    "select_pair",
    "track_richest",
    "LambdaDistSpec",
    "KinexchError",
    "ContractError",
    "ConfigError",
    "SimulationError",
    "FitError",
    "__version__",
]
