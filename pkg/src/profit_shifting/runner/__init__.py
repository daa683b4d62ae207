"""Configuration loading, batch sweeps, result emission and the command line."""

from .config import SweepSpec, load_config
from .emit import emit
from .sweep import RunRecord, run_sweep

__all__ = ["SweepSpec", "load_config", "emit", "RunRecord", "run_sweep"]
