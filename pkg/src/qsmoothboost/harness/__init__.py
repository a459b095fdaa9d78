"""Configuration, experiment runs, sweeps, invariant suites and the command line."""
from .config import ExperimentConfig, load_config, parse_config_text
from .runner import (EXIT_ABNORMAL, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, RESULT_COLUMNS,
                     invariant_violations, run_experiment, run_single)
from .sweep import ExponentFit, SweepResult, fit_exponents, sweep
from .verify import SUITES, Verdict, verify
