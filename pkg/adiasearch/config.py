"""
Global configuration settings for the adiabatic search simulator.
"""
import logging
import os
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler

from .utils.errors import InputError

# Simulation settings
DEFAULT_G = 0.5
DEFAULT_TOL = 1e-8
NORM_DRIFT_LIMIT = 1e-9
MAX_BITS = 24

# Spectrum settings
DENSE_LIMIT = 10
GRID_POINTS = 201
PLOT_LEVELS = 8
GAP_LEVELS = 2
DEGENERACY_GAP = 1e-12
RESIDUAL_LIMIT = 1e-8
GAP_XTOL = 1e-5
BLOCK_GUARD = 4
BLOCK_MAXITER = 2000

# Scaling experiment settings
SUCCESS_WINDOW = (0.12, 0.13)
MAX_ATTEMPTS = 60
DEFAULT_T0 = 1.0
SCALING_TOL = 1e-7
DEFAULT_N_RANGE = (5, 11)
DEFAULT_INSTANCES = 20
DEFAULT_MC = 2

# Seeds and parallelism: CLI flag > environment > default
DEFAULT_SEED_BASE = 20090101
DEFAULT_JOBS = 1
SEED_ENV = "ADIASEARCH_SEED"
JOBS_ENV = "ADIASEARCH_JOBS"

EXAMPLE_DATABASE = Path(__file__).resolve().parent / "paper3.json"

# UI settings
console = Console(stderr=True)


def env_default(name: str, default: int) -> int:
    """
    Integer setting from the environment, or default when the variable is unset.

    Raises:
        InputError: If the variable is set but is not an integer
    """
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"${name}={raw!r} is not an integer") from None


def configure_logging(verbose: bool = False) -> None:
    """Route package logging through the shared rich console."""
    root = logging.getLogger("adiasearch")
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        root.addHandler(
            RichHandler(console=console, show_path=False, rich_tracebacks=True)
        )
    root.propagate = False
