"""Experiment configuration, execution, pipeline search and reporting."""

from .config import CONFIG_SCHEMA, ConfigError, ExperimentPlan, SearchSpec, load_config, plan_from_dict
from .executor import CSV_COLUMNS, ExperimentResult, run_experiment, write_outputs
from .search import (
    SearchBudgetError,
    composite_search,
    enumerate_candidates,
    rank_subroutines,
    search_space_size,
)

__all__ = [
    "CONFIG_SCHEMA", "CSV_COLUMNS", "ConfigError", "ExperimentPlan", "ExperimentResult",
    "SearchBudgetError", "SearchSpec", "composite_search", "enumerate_candidates", "load_config",
    "plan_from_dict", "rank_subroutines", "run_experiment", "search_space_size", "write_outputs",
]
