"""Peer-to-peer wireless crowd charging simulator with battery-aging accounting."""

from .config import ConfigError, SimConfig, load_config, parse_config
from .engine import BatchSummary, RunResult, run_batch, run_simulation
from .metrics import MetricsRow
from .protocols import PROTOCOLS

__all__ = [
    "PROTOCOLS",
    "BatchSummary",
    "ConfigError",
    "MetricsRow",
    "RunResult",
    "SimConfig",
    "load_config",
    "parse_config",
    "run_batch",
    "run_simulation",
]
__version__ = "0.1.0"
