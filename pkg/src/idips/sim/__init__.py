"""Deterministic 2-D social-navigation simulator.

Social-force pedestrians, four robot action primitives, a delayed-opening
door, per-tick force/blame metrics, seeded trial running, and scenario and
demo generators.
"""

from .engine import (
    SimSnapshot,
    SnapshotRing,
    extract_world,
    init_snapshot,
    step,
    tick_metrics,
)
from .generators import (
    corridor_scenario,
    door_label_demos,
    door_scenario,
    greedy_policy,
    hidden_policy_and_demos,
    nice_policy,
    teacher_demos,
)
from .kernels import BACKEND
from .scenario import (
    Door,
    HumanSpec,
    Scenario,
    load_scenario,
    save_scenario,
    scenario_to_json,
)
from .trials import (
    TrialMetrics,
    TrialRow,
    aggregate,
    run_scripted,
    run_suite,
    run_trial,
    write_csv,
)

__all__ = [
    "BACKEND",
    "Door",
    "HumanSpec",
    "Scenario",
    "SimSnapshot",
    "SnapshotRing",
    "TrialMetrics",
    "TrialRow",
    "aggregate",
    "corridor_scenario",
    "door_label_demos",
    "door_scenario",
    "extract_world",
    "greedy_policy",
    "hidden_policy_and_demos",
    "init_snapshot",
    "load_scenario",
    "nice_policy",
    "run_scripted",
    "run_suite",
    "run_trial",
    "save_scenario",
    "scenario_to_json",
    "step",
    "teacher_demos",
    "tick_metrics",
    "write_csv",
]
