"""Benchmark problems, sweeps over noise levels and rules, and their outputs."""
from .config import REFERENCE_EPSILONS, REFERENCE_SEEDS, RunConfig, load_config
from .metrics import ErrorReport, error_metrics, fit_rate, summarize
from .problems import custom, example1, example2
from .runner import CellResult, SweepResult, run_cell, run_example1, run_example2, run_sweep, sweep, write_outputs
