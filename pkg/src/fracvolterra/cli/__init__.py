"""Config-driven experiment runner."""

from .config import ExperimentConfig, ExperimentKind, load_config, parse_config
from .io import RunManifest, write_results
from .runner import run_experiment

__all__ = ["ExperimentConfig", "ExperimentKind", "load_config", "parse_config",
           "RunManifest", "write_results", "run_experiment"]
