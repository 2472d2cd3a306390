"""Multi-agent path finding with asynchronous actions."""

from .graph import DurationTable, Graph, Instance, InstanceError, empty_grid, load_instance, load_map, load_scenario
from .lss import SearchParams, search
from .mstar import search_lsm, search_lsrm
from .naive import common_unit, naive_search
from .solution import SearchStats, Solution, TimedPath, Waypoint
from .state import Envelope, JointState
from .validate import brute_force_oracle, solution_cost, validate

__all__ = [
    "DurationTable",
    "Envelope",
    "Graph",
    "Instance",
    "InstanceError",
    "JointState",
    "SearchParams",
    "SearchStats",
    "Solution",
    "TimedPath",
    "Waypoint",
    "brute_force_oracle",
    "common_unit",
    "empty_grid",
    "load_instance",
    "load_map",
    "load_scenario",
    "naive_search",
    "search",
    "search_lsm",
    "search_lsrm",
    "solution_cost",
    "validate",
]
