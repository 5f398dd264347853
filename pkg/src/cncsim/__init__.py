"""Deterministic simulator and planner for compute/network convergent routing."""

from .model import (
    Assignment,
    BillRecord,
    Cnode,
    Level,
    Link,
    Outcome,
    RawRequest,
    RegularizedRequest,
    RoutingPlan,
    ServiceDescriptor,
    Tier,
    Topology,
    Verdict,
    validate_topology,
)
from .scenario import Scenario, load_scenario, validate_scenario
from .engine import Engine, SimResult, run
from .harness import SweepSpec, generate_workload, load_sweep, run_sweep, write_csv

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BillRecord",
    "Cnode",
    "Engine",
    "Level",
    "Link",
    "Outcome",
    "RawRequest",
    "RegularizedRequest",
    "RoutingPlan",
    "Scenario",
    "ServiceDescriptor",
    "SimResult",
    "SweepSpec",
    "Tier",
    "Topology",
    "Verdict",
    "generate_workload",
    "load_scenario",
    "load_sweep",
    "run",
    "run_sweep",
    "validate_scenario",
    "validate_topology",
    "write_csv",
]
