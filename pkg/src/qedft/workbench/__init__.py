"""Run configuration, pipelines, metrics, manifests, and the CLI."""

from .config import ConfigError, RunConfig, load_config, parse_config
from .metrics import MetricsReport, compute_metrics, mott_plateau_run
from .runs import (
    cmd_compare,
    cmd_generate_functional,
    cmd_import_functional,
    cmd_pure_vqe,
    cmd_run_dft,
    cmd_sweep,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "MetricsReport",
    "compute_metrics",
    "mott_plateau_run",
    "cmd_generate_functional",
    "cmd_run_dft",
    "cmd_pure_vqe",
    "cmd_sweep",
    "cmd_compare",
    "cmd_import_functional",
]
