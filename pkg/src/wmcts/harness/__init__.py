"""Experiment runner, statistics, plotting and command-line interface."""

from .configfile import load_experiments
from .experiment import (
    CSV_COLUMNS,
    ExperimentConfig,
    ResultRow,
    best_p,
    env_planner_defaults,
    read_results,
    run_episode,
    run_experiment,
    write_results,
)
from .oracle import OracleCase, oracle_suite
from .plotting import PlotSpec, emit_plot
from .stats import SUMMARY_COLUMNS, SummaryRow, aggregate, read_summary, write_summary

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "OracleCase",
    "PlotSpec",
    "ResultRow",
    "SUMMARY_COLUMNS",
    "SummaryRow",
    "aggregate",
    "best_p",
    "emit_plot",
    "env_planner_defaults",
    "load_experiments",
    "oracle_suite",
    "read_results",
    "read_summary",
    "run_episode",
    "run_experiment",
    "write_results",
    "write_summary",
]
