"""Reproducible experiment harness: configs, runners, reports, CLI."""

from .config import ExperimentConfig, InstanceSpec, load_config, parse_config
from .experiments import ensure_experiment, run_experiment
from .report import render_table
