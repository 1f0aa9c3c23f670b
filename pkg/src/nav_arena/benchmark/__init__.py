"""Seeded planner-comparison harness: scenarios, episode runner, reports."""
from .report import CSV_COLUMNS, export_csv, export_svg, load_csv
from .runner import (
    AggregateStats,
    DwaPlanner,
    PolicyPlanner,
    RelativeRow,
    RunResult,
    aggregate,
    build_planner,
    relative_performance,
    run_episode,
    run_suite,
)
from .scenarios import PlannerSpec, Scenario, Suite, default_scenarios, load_suite

__all__ = [
    "AggregateStats",
    "CSV_COLUMNS",
    "DwaPlanner",
    "PlannerSpec",
    "PolicyPlanner",
    "RelativeRow",
    "RunResult",
    "Scenario",
    "Suite",
    "aggregate",
    "build_planner",
    "default_scenarios",
    "export_csv",
    "export_svg",
    "load_csv",
    "load_suite",
    "relative_performance",
    "run_episode",
    "run_suite",
]
