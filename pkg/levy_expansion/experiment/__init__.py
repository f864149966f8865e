"""Experiment configuration schema and loading."""

from levy_expansion.experiment.schema import (
    ExperimentConfig,
    build_problem,
    load_config,
    load_config_file,
)

__all__ = ["ExperimentConfig", "build_problem", "load_config", "load_config_file"]
