"""Batch experiment layer: built-in scenarios, JSON configuration, CSV
ingestion, Monte-Carlo harnesses, and the command-line interface."""

from .config import ExperimentConfig
from .ingest import DiscretizationRule, ingest_csv, standard_lending_rules
from .synthetic import (
    Scenario,
    flip_scenario,
    lending_grid,
    lending_regression,
    lending_truth,
    three_point_scenario,
)
from .harness import (
    derive_seed,
    random_instance,
    run_consistency,
    run_coverage,
    run_fig1_style,
)

__all__ = [
    "ExperimentConfig",
    "DiscretizationRule",
    "ingest_csv",
    "standard_lending_rules",
    "Scenario",
    "flip_scenario",
    "lending_grid",
    "lending_regression",
    "lending_truth",
    "three_point_scenario",
    "derive_seed",
    "random_instance",
    "run_consistency",
    "run_coverage",
    "run_fig1_style",
]
