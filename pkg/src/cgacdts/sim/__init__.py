"""Scenario configs, runners and CSV run logs."""

from .runlog import LogWriteError, RunLog, export_csv, ik_columns, mpc_columns, read_csv
from .runner import (
    Check,
    CompareReport,
    RunResult,
    compare_stacked_vs_cooperative,
    run_scenario,
)
from .scenario import (
    KINDS,
    Scenario,
    ScenarioError,
    bundled_scenario,
    bundled_scenarios,
    load_scenario,
    parse_scenario,
    scenario_hash,
)

__all__ = [
    "KINDS", "Check", "CompareReport", "LogWriteError", "RunLog", "RunResult", "Scenario",
    "ScenarioError", "bundled_scenario", "bundled_scenarios", "compare_stacked_vs_cooperative",
    "export_csv", "ik_columns", "load_scenario", "mpc_columns", "parse_scenario", "read_csv",
    "run_scenario", "scenario_hash",
]
