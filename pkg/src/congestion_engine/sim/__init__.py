"""Closed-loop simulation of the decision engine."""

from .harness import (HarnessConfigError, RandomWalkConfig, RegularRun, load_harness_config, random_walk,
                      run_regular_harness, write_traces)
from .metrics import Metrics, alternative_spread, coefficient_of_variation, tail
from .scenario import Scenario, ScenarioError, five_route_scenario, load_scenario
from .world import Simulation, run_scenario

__all__ = [
    "HarnessConfigError", "Metrics", "RandomWalkConfig", "RegularRun", "Scenario", "ScenarioError", "Simulation",
    "alternative_spread", "coefficient_of_variation", "five_route_scenario", "load_harness_config", "load_scenario", "random_walk",
    "run_regular_harness", "run_scenario", "tail", "write_traces",
]
