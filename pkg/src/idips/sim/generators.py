"""Scenario factories, scripted teacher policies, and demo generators.

Everything here is seed-deterministic.  The teachers encode two social
styles: the nice robot stops and waits for nearby humans, the greedy one
swerves past them at speed.  hidden_policy_and_demos() builds random but
behaviorally live ground-truth policies for synthesis recovery tests, with
thresholds drawn from feature percentiles of a probe rollout so guards
actually fire.
"""

from __future__ import annotations

import math
import random

from ..ast import Policy
from ..domain import DomainDefinition, social_domain
from ..parser import parse_policy
from .scenario import Door, HumanSpec, Scenario
from .trials import run_scripted, run_trial

CORRIDOR_LEN = 12.0
CORRIDOR_HALF = 2.0


def _corridor_walls():
    return (
        (0.0, -CORRIDOR_HALF, CORRIDOR_LEN, -CORRIDOR_HALF),
        (0.0, CORRIDOR_HALF, CORRIDOR_LEN, CORRIDOR_HALF),
    )


def corridor_scenario(seed: int, n_humans: int = 4) -> Scenario:
    """Straight hallway with oncoming and same-direction pedestrians.

    Human goals sit past the corridor ends so nobody parks on the robot's
    route; trials differ in human count, placement, speed, and the lateral
    position of the robot's goal.
    """
    rng = random.Random(seed)
    humans = []
    for _ in range(n_humans):
        y = rng.uniform(-1.4, 1.4)
        y_goal = rng.uniform(-1.4, 1.4)
        speed = rng.uniform(0.6, 1.1)
        if rng.random() < 0.5:  # oncoming
            start = (rng.uniform(5.0, 11.0), y)
            goal = (-3.0, y_goal)
        else:
            start = (rng.uniform(2.0, 8.0), y)
            goal = (CORRIDOR_LEN + 3.0, y_goal)
        humans.append(HumanSpec(start, goal, speed))
    goal_y = rng.choice((-0.8, 0.0, 0.8))
    return Scenario(
        name=f"corridor-{seed}",
        walls=_corridor_walls(),
        robot_start=(0.5, 0.0),
        robot_goal=(CORRIDOR_LEN - 0.5, goal_y),
        humans=tuple(humans),
        seed=seed,
        max_ticks=2400,
    )


DOOR_X = 6.0
DOOR_HALF_GAP = 0.7


def door_scenario(seed: int, n_humans: int | None = None) -> Scenario:
    """Corridor split by a wall with a closed door in the middle.

    Human-free by default: a human parked across the robot's lane would
    deadlock any yield-and-wait policy, which is a crowding problem, not
    a door problem.  When requested, humans stay in the first chamber
    with goals well clear of the trigger radius, so only deliberate
    waiting opens the door.
    """
    rng = random.Random(seed)
    if n_humans is None:
        n_humans = 0
    humans = []
    for _ in range(n_humans):
        start = (rng.uniform(1.0, 3.0), rng.uniform(-1.4, 1.4))
        goal = (rng.uniform(1.0, 3.0), rng.uniform(-1.4, 1.4))
        humans.append(HumanSpec(start, goal, rng.uniform(0.5, 0.9)))
    walls = _corridor_walls() + (
        (DOOR_X, -CORRIDOR_HALF, DOOR_X, -DOOR_HALF_GAP),
        (DOOR_X, DOOR_HALF_GAP, DOOR_X, CORRIDOR_HALF),
    )
    return Scenario(
        name=f"door-{seed}",
        walls=walls,
        door=Door((DOOR_X, -DOOR_HALF_GAP, DOOR_X, DOOR_HALF_GAP)),
        robot_start=(0.5, rng.uniform(-0.5, 0.5)),
        # goal well short of the end wall: success fires before wall
        # proximity can resemble a blocked path
        robot_goal=(CORRIDOR_LEN - 2.0, 0.0),
        waypoints=((DOOR_X - 1.0, 0.0), (DOOR_X + 1.0, 0.0)),
        humans=tuple(humans),
        seed=seed,
        max_ticks=1200,
    )


# --- scripted teachers ----------------------------------------------------

NICE_TEXT = """\
if start == GoAlone && norm(p_h) < n_near [1,0,0] = 3.0:
    return Halt
if start == Halt && norm(p_h) > n_far [1,0,0] = 3.4:
    return GoAlone
"""

GREEDY_TEXT = """\
if start == GoAlone && norm(p_h) < g_near [1,0,0] = 1.5:
    return Pass
if start == Pass && norm(p_h) > g_far [1,0,0] = 2.2:
    return GoAlone
"""


def nice_policy(dom: DomainDefinition | None = None) -> Policy:
    return parse_policy(NICE_TEXT, dom or social_domain())


def greedy_policy(dom: DomainDefinition | None = None) -> Policy:
    return parse_policy(GREEDY_TEXT, dom or social_domain())


def teacher_demos(policy: Policy, seeds, n_humans: int = 4):
    """Concatenated execution traces of a teacher policy over corridor
    scenarios with the given seeds."""
    demos = []
    for seed in seeds:
        _m, trace = run_trial(corridor_scenario(seed, n_humans), policy)
        demos.extend(trace)
    return demos


# --- hidden ground-truth policies for synthesis recovery ------------------

# feature menu: (expression text, dim triple, needs-door)
_FEATURES = (
    ("norm(p_h)", (1, 0, 0)),
    ("p_h.x", (1, 0, 0)),
    ("abs(p_h.y)", (1, 0, 0)),
    ("dist(p_h, p_hl)", (1, 0, 0)),
    ("freePathLength(p_l)", (1, 0, 0)),
    ("norm(v_h)", (1, -1, 0)),
    ("v_h.x", (1, -1, 0)),
)


def _percentile(sorted_vals, q: float) -> float:
    if not sorted_vals:
        return 0.0
    i = min(len(sorted_vals) - 1, max(0, int(q * (len(sorted_vals) - 1))))
    return float(sorted_vals[i])


def _feature_values(dom, expr_text: str, dim, states):
    """Evaluate one menu feature over probe states via a throwaway guard."""
    from ..evaluator import eval_expr
    from ..parser import parse_predicate

    d = list(dim)
    pred = parse_predicate(f"{expr_text} > probe [{d[0]},{d[1]},{d[2]}] = 0.0", dom)
    expr = pred.expr
    vals = sorted(
        v for v in (eval_expr(expr, w) for w in states)
        if math.isfinite(v) and abs(v) < 500.0  # sentinel states are not informative
    )
    return vals


def hidden_policy_and_demos(seed: int, dom: DomainDefinition | None = None):
    """A random live ground-truth policy plus train and holdout demo sets.

    The policy has one guarded departure from GoAlone (one or two literals,
    expression depth <= 2, <= 2 params) and a single-literal return branch.
    Candidates whose rollouts barely transition are re-rolled so the demos
    carry signal.
    """
    dom = dom or social_domain()
    probe_scn = corridor_scenario(seed, n_humans=3 + seed % 3)
    trace, _snaps = run_scripted(probe_scn, lambda prev, w: "GoAlone")
    probe_states = [d.state for d in trace]

    best = None  # (balance, policy, train): fallback if no attempt is clean
    for attempt in range(20):
        rng = random.Random(seed * 1000 + attempt)
        target = rng.choice(("Halt", "Follow", "Pass"))
        n_lits = 1 if rng.random() < 0.6 else 2
        lits = []
        feats = rng.sample(_FEATURES, n_lits)
        rel0 = theta0 = None
        for i, (text, dim) in enumerate(feats):
            vals = _feature_values(dom, text, dim, probe_states)
            rel = rng.choice(("<", ">"))
            # a mid percentile keeps the guard selective on the menu
            # feature yet satisfiable inside the probe distribution
            q = rng.uniform(0.25, 0.75) if n_lits == 1 else rng.uniform(0.4, 0.9)
            theta = _percentile(vals, q if rel == "<" else 1.0 - q)
            if i == 0:
                rel0, theta0 = rel, theta
            d = list(dim)
            lits.append(f"{text} {rel} h{i} [{d[0]},{d[1]},{d[2]}] = {theta!r}")
        guard = " && ".join(lits)
        back_text, back_dim = feats[0]
        # return branch releases when the first feature crosses back out,
        # with hysteresis so the two branches cannot fire on one state
        back_rel = ">" if rel0 == "<" else "<"
        margin = 0.1 if back_rel == ">" else -0.1
        back_theta = theta0 + margin * max(1.0, abs(theta0))
        d = list(back_dim)
        text = (
            f"if start == GoAlone && {guard}:\n    return {target}\n"
            f"if start == {target} && {back_text} {back_rel} "
            f"r0 [{d[0]},{d[1]},{d[2]}] = {back_theta!r}:\n    return GoAlone\n"
        )
        policy = parse_policy(text, dom)

        train = []
        base = seed + attempt * 31  # re-rolls explore fresh crowds too
        for i, s in enumerate((base, base + 250, base + 500, base + 750)):
            _m, tr = run_trial(corridor_scenario(s, 2 + (seed + i) % 4), policy)
            train.extend(tr)
        holdout = []
        for i, s in enumerate((seed + 1000, seed + 1250)):
            _m, tr = run_trial(corridor_scenario(s, 2 + (seed + i) % 3), policy)
            holdout.extend(tr)

        # every branch decision must occur both ways, in train and in the
        # held-out runs, or the demos cannot pin the guard down (an
        # always-true guard is unlearnable and a teacher that locks into
        # one action off-distribution makes held-out scores meaningless)
        def _balance(demos):
            decisions = {
                ("GoAlone", "stay"): 0, ("GoAlone", "go"): 0,
                (target, "stay"): 0, (target, "go"): 0,
            }
            for dmo in demos:
                if dmo.prev in ("GoAlone", target):
                    decisions[dmo.prev, "stay" if dmo.next == dmo.prev else "go"] += 1
            return min(decisions.values())

        quality = (min(_balance(train), 25), min(_balance(holdout), 5))
        if best is None or quality > best[0]:
            best = (quality, policy, train, holdout)
        if quality == (25, 5):
            break
    _q, policy, train, holdout = best
    extra = 0
    while len(train) < 500 and extra < 6:  # short rollouts: top up to 500+
        _m, tr = run_trial(corridor_scenario(seed + 2000 + extra * 137, 3 + seed % 3), policy)
        train.extend(tr)
        extra += 1
    train = train[:2000]
    return policy, train, holdout


# --- door demonstrations --------------------------------------------------

HALT_AT_DOOR_DIST = 1.1
APPROACH_NEG_DIST = 1.6


def door_reference_controller(prev: str, w) -> str:
    """Scripted teacher for labeling: stop short of a closed door, stay
    put until it opens, then carry on."""
    d_door = math.hypot(*w["p_d"])
    if w["s_d"] < 0.5 and d_door < HALT_AT_DOOR_DIST:
        return "Halt"
    if prev == "Halt" and w["s_d"] > 0.5:
        return "GoAlone"
    return prev


def door_label_demos(seed: int = 0, max_labels: int = 10):
    """At most max_labels transitions from one clean closed-door run.

    The negatives bracket the stop distance from both sides: an approach
    tick just outside it and post-open plus near-goal cruising ticks with
    comparably short free paths.  That pins any learned stop threshold
    between the halt state and the approach tick, inside the door's
    trigger radius, so waiting actually starts.  A closed-door hold and
    an open-door release force the resume condition onto the door state
    rather than geometry, which does not change while waiting."""
    scn = door_scenario(seed, n_humans=0)
    trace, _snaps = run_scripted(scn, door_reference_controller)

    def find(pred, start=0):
        return next((i for i in range(start, len(trace)) if pred(trace[i])), None)

    def d_door(d):
        return math.hypot(*d.state["p_d"])

    approach = find(lambda d: d.prev == "GoAlone" and d_door(d) <= APPROACH_NEG_DIST)
    door_halt = find(lambda d: (d.prev, d.next) == ("GoAlone", "Halt"))
    door_release = find(lambda d: (d.prev, d.next) == ("Halt", "GoAlone"))
    if None in (approach, door_halt, door_release) or not trace[approach].next == "GoAlone":
        raise RuntimeError("door labeling run missed a required state")

    picks = [
        # mid-corridor cruising, door far ahead
        trace[door_halt // 2],
        trace[approach],
        trace[door_halt],
        # holding still while the door is closed
        trace[door_halt + max(1, (door_release - door_halt) // 2)],
        trace[door_release],
    ]
    # just past the open door: still close to it, must keep going
    for i in (door_release + 8, door_release + 20):
        if i < len(trace):
            picks.append(trace[i])
    # cruising right before the goal: rules out halting on any
    # short-free-path or near-destination feature
    if len(trace) > 3:
        picks.append(trace[-3])
    return picks[:max_labels]
