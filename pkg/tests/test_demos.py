"""Demonstration ingestion and fault localization."""

import json
import random

import pytest

from idips.ast import ActionEq, And, BlankPred, Policy
from idips.demos import (
    Demonstration,
    find_predicates,
    load_demos,
    policy_demo_score,
    save_demos,
)
from idips.errors import SchemaError, UnknownAction
from idips.evaluator import Obstacles, WorldState
from idips.parser import parse_policy

from conftest import mkworld


def _d(prev, nxt, **state):
    return Demonstration(prev, mkworld(**state), nxt)


def test_basic_split():
    demos = [_d("GoAlone", "Pass", p_h=(1.0, 0.0)), _d("GoAlone", "GoAlone", p_h=(9.0, 0.0))]
    faults = find_predicates(demos, Policy(()))
    (fault,) = [f for f in faults if f.transition == ("GoAlone", "Pass")]
    assert len(fault.e_pos) == 1 and len(fault.e_neg) == 1
    assert fault.e_pos[0]["p_h"] == (1.0, 0.0)
    assert fault.e_neg[0]["p_h"] == (9.0, 0.0)


def test_scaffold_for_missing_branch():
    demos = [_d("GoAlone", "Pass", p_h=(1.0, 0.0))]
    (fault,) = find_predicates(demos, Policy(()))
    assert isinstance(fault.predicate, And)
    assert isinstance(fault.predicate.left, ActionEq)
    assert isinstance(fault.predicate.right, BlankPred)


def test_existing_branch_guard_attributed(dom):
    p = parse_policy(
        "if (start == GoAlone && norm(p_h) < a [1,0,0] = 2.0): return Halt\n", dom
    )
    demos = [_d("GoAlone", "Halt", p_h=(1.0, 0.0)), _d("GoAlone", "GoAlone", p_h=(9.0, 0.0))]
    (fault,) = [f for f in faults_for(demos, p) if f.transition == ("GoAlone", "Halt")]
    assert fault.predicate == p.branches[0].guard


def faults_for(demos, p):
    return find_predicates(demos, p)


def test_self_transitions_only_no_cross_fault():
    demos = [_d(a, a) for a in ("GoAlone", "Halt", "Pass")]
    faults = find_predicates(demos, Policy(()))
    for f in faults:
        a1, a2 = f.transition
        if a1 != a2:
            assert not f.e_pos


def test_conflicting_demos_kept_on_both_sides():
    w = mkworld(p_h=(2.0, 0.0))
    demos = [
        Demonstration("GoAlone", w, "Pass"),
        Demonstration("GoAlone", w, "Halt"),
    ]
    faults = {f.transition: f for f in find_predicates(demos, Policy(()))}
    to_pass = faults[("GoAlone", "Pass")]
    to_halt = faults[("GoAlone", "Halt")]
    assert w in to_pass.e_pos and w in to_halt.e_pos
    assert w in to_pass.e_neg and w in to_halt.e_neg


def test_partition_property():
    rng = random.Random(7)
    actions = ("GoAlone", "Pass", "Follow", "Halt")
    demos = [
        _d(rng.choice(actions), rng.choice(actions), p_h=(rng.uniform(0, 9), 0.0))
        for _ in range(120)
    ]
    faults = find_predicates(demos, Policy(()))
    by_a1 = {}
    for f in faults:
        by_a1.setdefault(f.transition[0], []).append(f)
    for a1, group in by_a1.items():
        targets = {f.transition[1] for f in group}
        mine = [d for d in demos if d.prev == a1]
        for d in mine:
            pos_hits = sum(d.state in f.e_pos for f in group if f.transition[1] == d.next)
            neg_hits = sum(d.state in f.e_neg for f in group if f.transition[1] != d.next)
            # self-transitions are the default rule's job: no (a1, a1) fault
            assert pos_hits == (1 if d.next != a1 else 0)
            assert neg_hits == len([t for t in targets if t != d.next])


def test_order_independence():
    rng = random.Random(3)
    actions = ("GoAlone", "Pass", "Halt")
    demos = [
        _d(rng.choice(actions), rng.choice(actions), p_h=(rng.uniform(0, 9), 0.0))
        for _ in range(60)
    ]
    shuffled = demos[:]
    rng.shuffle(shuffled)
    a = {
        f.transition: (set(map(hash, f.e_pos)), set(map(hash, f.e_neg)))
        for f in find_predicates(demos, Policy(()))
    }
    b = {
        f.transition: (set(map(hash, f.e_pos)), set(map(hash, f.e_neg)))
        for f in find_predicates(shuffled, Policy(()))
    }
    assert a == b


def test_unknown_action_rejected(dom):
    with pytest.raises(UnknownAction):
        load_demos_from_obj(
            {"v": 1, "demos": [_json_demo(prev="Fly")]}, dom
        )


def _json_demo(prev="GoAlone", nxt="Halt"):
    state = {k: list(v) if isinstance(v, tuple) else v for k, v in mkworld().items()}
    return {"prev": prev, "next": nxt, "tick": 0, "source": "simulated", "state": state}


def load_demos_from_obj(obj, dom):
    from idips.demos import demos_from_json

    return demos_from_json(obj, dom)


def test_save_load_roundtrip(tmp_path, dom):
    demos = [
        Demonstration("GoAlone", mkworld(p_h=(1.25, -0.5)), "Halt", tick=7, source="ui-label"),
        Demonstration(
            "Halt",
            WorldState(
                dict(mkworld().items()),
                Obstacles(segments=((0.0, -1.0, 9.0, -1.0),), discs=((3.0, 0.0, 0.3),)),
            ),
            "GoAlone",
            tick=9,
        ),
    ]
    path = tmp_path / "demos.json"
    save_demos(demos, path)
    loaded = load_demos(path, dom)
    assert loaded == demos

    # canonical save is byte-stable
    path2 = tmp_path / "again.json"
    save_demos(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_schema_error_names_missing_field(tmp_path, dom):
    rec = _json_demo()
    del rec["state"]["v_h"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"v": 1, "demos": [rec]}))
    with pytest.raises(SchemaError) as exc:
        load_demos(path, dom)
    assert "v_h" in str(exc.value)


def test_policy_demo_score(dom):
    p = parse_policy(
        "if (start == GoAlone && norm(p_h) < a [1,0,0] = 2.0): return Halt\n", dom
    )
    demos = [
        _d("GoAlone", "Halt", p_h=(1.0, 0.0)),
        _d("GoAlone", "GoAlone", p_h=(5.0, 0.0)),
        _d("GoAlone", "Halt", p_h=(6.0, 0.0)),  # policy misses this one
    ]
    assert policy_demo_score(p, demos) == pytest.approx(2 / 3)
