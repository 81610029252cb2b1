"""Demonstration records, demos.json io, and fault localization.

Fault localization maps a demo set plus a policy to, per observed action
transition, the responsible guard (or a scaffold when no branch exists yet)
and its positive/negative example sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .ast import (
    START,
    Action,
    ActionEq,
    And,
    BlankPred,
    FalseP,
    Or,
    Policy,
    Predicate,
    TrueP,
)
from .dims import Kind
from .domain import DomainDefinition
from .errors import SchemaError, UnknownAction
from .evaluator import Obstacles, WorldState, eval_policy

SOURCES = ("simulated", "joystick", "ui-label")


@dataclass(frozen=True)
class Demonstration:
    """One observed step: in state `state` with action `prev`, do `next`."""

    prev: Action
    state: WorldState
    next: Action
    tick: int = 0
    source: str = "simulated"


@dataclass(frozen=True)
class LocalizedFault:
    """A transition, its responsible predicate, and its example sets.

    `predicate` is the existing branch guard when the policy has a branch
    for the transition, otherwise a `start == a1 && ?` scaffold.  E sets
    keep duplicates: repeated states weight the solver's counts.
    """

    transition: tuple
    predicate: Predicate
    e_pos: tuple = field(default=())
    e_neg: tuple = field(default=())
    has_branch: bool = False


def _state_key(w: WorldState) -> str:
    return repr((tuple(w.items()), w.obstacles))


def _may_fire(guard: Predicate, prev: Action) -> bool:
    """Three-valued check: can the guard possibly hold when `start` is prev?"""
    if isinstance(guard, TrueP):
        return True
    if isinstance(guard, FalseP):
        return False
    if isinstance(guard, ActionEq):
        return guard.rhs == prev
    if isinstance(guard, And):
        return _may_fire(guard.left, prev) and _may_fire(guard.right, prev)
    if isinstance(guard, Or):
        return _may_fire(guard.left, prev) or _may_fire(guard.right, prev)
    return True  # comparisons and blanks: unknown, so possibly true


def scaffold(a1: Action) -> Predicate:
    return And(ActionEq(START, a1), BlankPred())


def find_predicates(demos, policy: Policy) -> list:
    """Localize faults: per transition, the guard to fix and its examples.

    For each ordered pair (a1, a2) where a1 occurs as a previous action,
    E+ holds the states demonstrating a1->a2 and E- the states where a1
    led elsewhere.  Pairs come from demonstrated transitions (a1 != a2)
    and from existing branches reachable from a1.  Output ordering and E
    set ordering depend only on the demo multiset, not its order.
    """
    by_prev: dict[str, list] = {}
    for d in demos:
        by_prev.setdefault(d.prev, []).append(d)

    faults: list[LocalizedFault] = []
    for a1 in sorted(by_prev):
        group = sorted(by_prev[a1], key=lambda d: (_state_key(d.state), d.next))
        targets = {d.next for d in group}

        # the first branch that can fire for prev=a1 with result a2 owns the pair
        branch_for: dict[str, Predicate] = {}
        for b in policy.branches:
            if b.result not in branch_for and _may_fire(b.guard, a1):
                branch_for[b.result] = b.guard

        pair_targets = sorted({t for t in targets if t != a1} | set(branch_for))
        for a2 in pair_targets:
            e_pos = tuple(d.state for d in group if d.next == a2)
            e_neg = tuple(d.state for d in group if d.next != a2)
            guard = branch_for.get(a2)
            faults.append(
                LocalizedFault(
                    (a1, a2),
                    guard if guard is not None else scaffold(a1),
                    e_pos,
                    e_neg,
                    has_branch=guard is not None,
                )
            )
    return faults


def policy_demo_score(policy: Policy, demos) -> float:
    """Fraction of demonstrations the policy reproduces; empty set scores 1."""
    if not demos:
        return 1.0
    good = sum(1 for d in demos if eval_policy(policy, d.prev, d.state) == d.next)
    return good / len(demos)


# --- demos.json -----------------------------------------------------------


def _require(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise SchemaError(path, msg)


def _state_from_json(obj, dom: DomainDefinition, path: str, obstacles) -> WorldState:
    _require(isinstance(obj, dict), path, "state must be an object")
    values = {}
    for name, declared in dom.inputs:
        _require(name in obj, f"{path}.{name}", "missing input")
        raw = obj[name]
        if declared.kind is Kind.VECTOR:
            ok = isinstance(raw, list) and len(raw) == 2 and all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in raw
            )
            _require(ok, f"{path}.{name}", "expected a 2-element number array")
            values[name] = (float(raw[0]), float(raw[1]))
        elif declared.kind is Kind.SCALAR:
            _require(
                isinstance(raw, (int, float)) and not isinstance(raw, bool),
                f"{path}.{name}",
                "expected a number",
            )
            values[name] = float(raw)
        else:
            _require(isinstance(raw, bool), f"{path}.{name}", "expected a boolean")
            values[name] = raw
    declared_names = {n for n, _ in dom.inputs}
    for name in obj:
        _require(name in declared_names, f"{path}.{name}", "not a declared input")
    return WorldState(values, obstacles)


def _obstacles_from_json(obj, path: str) -> Obstacles | None:
    if obj is None:
        return None
    _require(isinstance(obj, dict), path, "obstacles must be an object")
    segs = obj.get("segments", [])
    discs = obj.get("discs", [])
    _require(
        isinstance(segs, list) and all(isinstance(s, list) and len(s) == 4 for s in segs),
        f"{path}.segments",
        "expected arrays of 4 numbers",
    )
    _require(
        isinstance(discs, list) and all(isinstance(c, list) and len(c) == 3 for c in discs),
        f"{path}.discs",
        "expected arrays of 3 numbers",
    )
    return Obstacles(
        segments=tuple(tuple(float(v) for v in s) for s in segs),
        discs=tuple(tuple(float(v) for v in c) for c in discs),
    )


def demo_to_json(d: Demonstration) -> dict:
    state = {}
    for name, value in d.state.items():
        state[name] = list(value) if isinstance(value, tuple) else value
    rec = {
        "prev": d.prev,
        "next": d.next,
        "tick": d.tick,
        "source": d.source,
        "state": state,
    }
    obs = d.state.obstacles
    if obs is not None and obs:
        rec["obstacles"] = {
            "segments": [list(s) for s in obs.segments],
            "discs": [list(c) for c in obs.discs],
        }
    return rec


def demo_from_json(rec, dom: DomainDefinition, path: str = "demo") -> Demonstration:
    _require(isinstance(rec, dict), path, "demo must be an object")
    for key in ("prev", "next", "tick", "source", "state"):
        _require(key in rec, f"{path}.{key}", "missing field")
    for key in ("prev", "next"):
        _require(isinstance(rec[key], str), f"{path}.{key}", "expected a string")
        if rec[key] not in dom.actions:
            raise UnknownAction(rec[key])
    _require(
        isinstance(rec["tick"], int) and not isinstance(rec["tick"], bool),
        f"{path}.tick",
        "expected an integer",
    )
    _require(rec["source"] in SOURCES, f"{path}.source", f"expected one of {SOURCES}")
    obstacles = _obstacles_from_json(rec.get("obstacles"), f"{path}.obstacles")
    state = _state_from_json(rec["state"], dom, f"{path}.state", obstacles)
    return Demonstration(rec["prev"], state, rec["next"], rec["tick"], rec["source"])


def demos_to_json(demos) -> dict:
    return {"v": 1, "demos": [demo_to_json(d) for d in demos]}


def demos_from_json(doc, dom: DomainDefinition) -> list:
    _require(isinstance(doc, dict), "demos", "top level must be an object")
    _require(doc.get("v") == 1, "demos.v", "unsupported version")
    _require(isinstance(doc.get("demos"), list), "demos.demos", "expected an array")
    return [
        demo_from_json(rec, dom, f"demos[{i}]") for i, rec in enumerate(doc["demos"])
    ]


def save_demos(demos, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(demos_to_json(demos), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_demos(path, dom: DomainDefinition) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError("demos", f"invalid JSON: {e}") from None
    return demos_from_json(doc, dom)
