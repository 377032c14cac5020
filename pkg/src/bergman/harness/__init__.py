"""Reproducible experiments over the library, emitting JSON or CSV reports."""

from .config import EXPERIMENTS, ExperimentConfig, parse_config, sample_points
from .experiments import run
from .report import DiagnosticsReport, Row, emit, to_csv, to_json

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "DiagnosticsReport",
    "Row",
    "emit",
    "parse_config",
    "run",
    "sample_points",
    "to_csv",
    "to_json",
]
