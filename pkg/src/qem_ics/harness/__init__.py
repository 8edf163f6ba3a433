"""Config-driven experiments, CSV output and scaling fits."""

from .config import ConfigError, ExperimentConfig, ExperimentKind, FamilyGrid, NoiseSpec, load_config, parse_config
from .experiments import ExperimentResult, NumericalError, run_experiment, write_result
from .fit import ScalingFit, fit_power_law
from .io import Table, read_table, write_table

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentResult",
    "FamilyGrid",
    "NoiseSpec",
    "NumericalError",
    "ScalingFit",
    "Table",
    "fit_power_law",
    "load_config",
    "parse_config",
    "read_table",
    "run_experiment",
    "write_result",
    "write_table",
]
