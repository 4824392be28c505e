"""Config loading, experiment dispatch, run records, reporting, CLI."""

from stable_ddsde.harness.config import (
    ExperimentConfig,
    KINDS,
    load_config,
    validate_config,
)
from stable_ddsde.harness.runner import RunRecord, load_record, run_experiment
from stable_ddsde.harness.report import render_report

__all__ = [
    "ExperimentConfig",
    "KINDS",
    "load_config",
    "validate_config",
    "RunRecord",
    "load_record",
    "run_experiment",
    "render_report",
]
