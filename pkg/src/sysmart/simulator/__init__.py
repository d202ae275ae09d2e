"""Deterministic discrete-event store simulation."""

from .engine import EventLog, SimulationResult, ground_truth, run
from .scenario import Scenario, ScenarioError, load_scenario, load_scenario_file

__all__ = [
    "EventLog",
    "Scenario",
    "ScenarioError",
    "SimulationResult",
    "ground_truth",
    "load_scenario",
    "load_scenario_file",
    "run",
]
