"""Trial execution and metric aggregation.

run_trial drives one policy through one scenario tick by tick, recording
the social metrics and the full transition trace (reusable as demos).
run_suite crosses policies with scenario generators over seeded trials and
writes the per-trial CSV; aggregate() adds means with 90% confidence
intervals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from statistics import NormalDist, mean, stdev

from ..demos import Demonstration
from ..evaluator import eval_policy
from .engine import extract_world, init_snapshot, step, tick_metrics
from .scenario import Scenario

Z90 = NormalDist().inv_cdf(0.95)  # two-sided 90% interval


@dataclass(frozen=True)
class TrialMetrics:
    force: float  # mean per-tick crowd proximity force over the trial
    blame: float  # mean per-tick share of that force due to robot approach
    time_to_goal: float  # seconds; inf when the goal was never reached
    success: bool

    def __post_init__(self):
        if self.force < 0.0 or self.blame < 0.0:
            raise ValueError("force and blame must be >= 0")
        if self.success and not math.isfinite(self.time_to_goal):
            raise ValueError("successful trials need a finite time_to_goal")


def run_trial(scenario: Scenario, policy, start_action: str = "GoAlone"):
    """Execute the policy until the goal or the tick limit.

    Returns (TrialMetrics, trace) where trace is the list of
    Demonstration(prev, world, next) triples actually executed.
    """
    snap = init_snapshot(scenario, start_action)
    prev = start_action
    force = 0.0
    blame = 0.0
    ticks = 0
    trace: list[Demonstration] = []
    goal = scenario.robot_goal
    time_s = math.inf
    success = False
    for _ in range(scenario.max_ticks):
        w = extract_world(snap, scenario)
        nxt = eval_policy(policy, prev, w)
        trace.append(Demonstration(prev, w, nxt))
        snap = step(snap, nxt, scenario)
        f, b = tick_metrics(snap)
        force += f
        blame += b
        ticks += 1
        prev = nxt
        if (
            math.hypot(snap.robot_pos[0] - goal[0], snap.robot_pos[1] - goal[1])
            < scenario.goal_radius
        ):
            success = True
            time_s = snap.tick * scenario.dt
            break
    # means, not integrals: a patient policy that waits out a crowd must
    # not score worse than one that barges through quickly
    n = max(1, ticks)
    return TrialMetrics(force / n, blame / n, time_s, success), trace


def run_scripted(scenario: Scenario, controller, start_action: str = "GoAlone"):
    """Like run_trial but driven by a plain (prev, world) -> action
    callable; used by demo generators and scripted teachers."""
    snap = init_snapshot(scenario, start_action)
    prev = start_action
    trace: list[Demonstration] = []
    snaps: list = [snap]
    goal = scenario.robot_goal
    for _ in range(scenario.max_ticks):
        w = extract_world(snap, scenario)
        nxt = controller(prev, w)
        trace.append(Demonstration(prev, w, nxt))
        snap = step(snap, nxt, scenario)
        snaps.append(snap)
        prev = nxt
        if (
            math.hypot(snap.robot_pos[0] - goal[0], snap.robot_pos[1] - goal[1])
            < scenario.goal_radius
        ):
            break
    return trace, snaps


@dataclass(frozen=True)
class TrialRow:
    policy: str
    scenario: str
    seed: int
    metrics: TrialMetrics


CSV_HEADER = ["policy", "scenario", "seed", "success", "time_s", "force", "blame"]


def run_suite(policies, generators, n_trials: int, base_seed: int = 0):
    """Cross product of policies x scenario generators x seeds.

    policies: {name: Policy}; generators: {name: seed -> Scenario}.
    Trial i uses seed base_seed + i for every combination, so policies
    face identical worlds.
    """
    rows: list[TrialRow] = []
    for pname, policy in policies.items():
        for sname, gen in generators.items():
            for i in range(n_trials):
                seed = base_seed + i
                metrics, _trace = run_trial(gen(seed), policy)
                rows.append(TrialRow(pname, sname, seed, metrics))
    return rows


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for r in rows:
            m = r.metrics
            w.writerow([
                r.policy, r.scenario, r.seed,
                1 if m.success else 0,
                repr(m.time_to_goal), repr(m.force), repr(m.blame),
            ])


def _ci(values) -> tuple:
    """(mean, 90% CI half-width); half-width 0 for fewer than 2 values."""
    if not values:
        return (math.nan, 0.0)
    if len(values) == 1:
        return (values[0], 0.0)
    return (mean(values), Z90 * stdev(values) / math.sqrt(len(values)))


def aggregate(rows):
    """Per (policy, scenario): success rate, and mean +/- 90% CI for
    time (successful trials only), force, and blame."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.policy, r.scenario), []).append(r.metrics)
    out = {}
    for key, ms in sorted(groups.items()):
        times = [m.time_to_goal for m in ms if m.success]
        out[key] = {
            "trials": len(ms),
            "success_rate": sum(1 for m in ms if m.success) / len(ms),
            "time": _ci(times),
            "force": _ci([m.force for m in ms]),
            "blame": _ci([m.blame for m in ms]),
        }
    return out
