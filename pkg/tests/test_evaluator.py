"""Expression/predicate/policy evaluation, scoring, partial evaluation."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from idips.ast import (
    ActionEq,
    And,
    Branch,
    Gt,
    InputVar,
    Lt,
    Or,
    Param,
    Policy,
    TrueP,
)
from idips.dims import DIMENSIONLESS, LENGTH, Dimension, scalar, vector
from idips.errors import MissingInput
from idips.evaluator import (
    Obstacles,
    WorldState,
    eval_expr,
    eval_policy,
    eval_policy_traced,
    eval_residual,
    eval_shape,
    free_path_length,
    partial_eval,
    score,
    shape_params,
    trace_literals,
)
from idips.ast import Binary, Const, Unary
from idips.parser import parse_policy, parse_predicate

from conftest import mkworld


def _norm(name="p_h"):
    return Unary("norm", InputVar(name, vector(LENGTH)))


def test_norm_345():
    w = mkworld(p_h=(3.0, 4.0))
    assert eval_expr(_norm(), w) == 5.0


def test_abs_negative_speed():
    e = Unary("abs", Unary("v_x", InputVar("v_h", vector(Dimension(1, -1, 0)))))
    w = mkworld(v_h=(-2.0, 0.0))
    assert eval_expr(e, w) == 2.0


def test_dist_euclidean():
    e = Binary("dist", InputVar("p_h", vector(LENGTH)), InputVar("p_hl", vector(LENGTH)))
    w = mkworld(p_h=(1.0, 0.0), p_hl=(1.0, 3.0))
    assert eval_expr(e, w) == 3.0


def test_vector_arithmetic_and_accessors():
    e = Unary("v_x", Binary("-", InputVar("p_g", vector(LENGTH)), InputVar("p_l", vector(LENGTH))))
    w = mkworld(p_g=(8.0, 1.0), p_l=(3.0, 1.0))
    assert eval_expr(e, w) == 5.0


def test_scalar_times_vector():
    e = Unary("norm", Binary("*", Const(2.0, scalar(DIMENSIONLESS)), InputVar("p_h", vector(LENGTH))))
    w = mkworld(p_h=(3.0, 4.0))
    assert eval_expr(e, w) == 10.0


def test_missing_input():
    w = WorldState({"p_g": (1.0, 0.0)})
    with pytest.raises(MissingInput):
        eval_expr(_norm("p_h"), w)


def test_angle_of_forward_vector():
    e = Unary("angle", InputVar("p_h", vector(LENGTH)))
    assert eval_expr(e, mkworld(p_h=(2.0, 2.0))) == pytest.approx(math.pi / 4)


# --- policy semantics -----------------------------------------------------


def _policy(dom):
    return parse_policy(
        "if (start == GoAlone && norm(p_h) < a [1,0,0] = 2.0): return Halt\n"
        "if (start == Halt && norm(p_h) > b [1,0,0] = 3.0): return GoAlone\n",
        dom,
    )


def test_first_match_wins(dom):
    p = parse_policy(
        "if (start == GoAlone && norm(p_h) < a [1,0,0] = 5.0): return Halt\n"
        "if (start == GoAlone && norm(p_h) < b [1,0,0] = 5.0): return Pass\n",
        dom,
    )
    assert eval_policy(p, "GoAlone", mkworld(p_h=(1.0, 0.0))) == "Halt"


def test_fall_through_keeps_previous(dom):
    p = _policy(dom)
    assert eval_policy(p, "GoAlone", mkworld(p_h=(4.0, 0.0))) == "GoAlone"
    assert eval_policy(p, "Pass", mkworld(p_h=(0.5, 0.0))) == "Pass"


def test_empty_policy_is_identity():
    assert eval_policy(Policy(()), "Halt", mkworld()) == "Halt"


def test_guard_gates_on_previous_action(dom):
    p = _policy(dom)
    w = mkworld(p_h=(1.0, 0.0))
    assert eval_policy(p, "GoAlone", w) == "Halt"
    assert eval_policy(p, "Follow", w) == "Follow"


def test_traced_reports_branch_index(dom):
    p = _policy(dom)
    assert eval_policy_traced(p, "GoAlone", mkworld(p_h=(1.0, 0.0))) == ("Halt", 0)
    assert eval_policy_traced(p, "Halt", mkworld(p_h=(4.0, 0.0))) == ("GoAlone", 1)
    assert eval_policy_traced(p, "Pass", mkworld()) == ("Pass", None)


def test_trace_literals_values(dom):
    g = parse_predicate("norm(p_h) < a [1,0,0] = 2.0 && s_d > b [0,0,0] = 0.5", dom)
    lits = trace_literals(g, mkworld(p_h=(1.0, 0.0), s_d=0.0), prev="GoAlone")
    assert [l["holds"] for l in lits] == [True, False]
    assert lits[0]["lhs"] == 1.0 and lits[0]["threshold"] == 2.0 and lits[0]["op"] == "<"
    assert lits[0]["lhs_text"] == "norm(p_h)"


# --- score ----------------------------------------------------------------


def test_score_counting():
    w1, w2, w3, w4 = (mkworld(p_h=(float(i), 0.0)) for i in (1, 2, 3, 4))
    b = Lt(_norm(), Param("t", LENGTH, 2.5))
    assert score(b, [w1], []) == 1.0
    assert score(b, [], [w1]) == 0.0
    assert score(b, [w1, w2, w3], [w4]) == 0.75
    assert score(b, [], []) == 1.0


def test_score_true_predicate():
    assert score(TrueP(), [mkworld()], []) == 1.0
    assert score(TrueP(), [], [mkworld()]) == 0.0


# --- free path ------------------------------------------------------------


def test_free_path_unobstructed_is_target_distance():
    assert free_path_length((4.0, 0.0), None) == 4.0
    assert free_path_length((4.0, 0.0), Obstacles()) == 4.0


def test_free_path_hits_wall():
    obs = Obstacles(segments=((2.0, -1.0, 2.0, 1.0),))
    assert free_path_length((5.0, 0.0), obs) == pytest.approx(2.0)


def test_free_path_hits_disc():
    obs = Obstacles(discs=((3.0, 0.0, 0.5),))
    assert free_path_length((5.0, 0.0), obs) == pytest.approx(2.5)


def test_free_path_ignores_obstacle_behind():
    obs = Obstacles(segments=((-2.0, -1.0, -2.0, 1.0),))
    assert free_path_length((5.0, 0.0), obs) == 5.0


# --- partial evaluation ---------------------------------------------------


def test_partial_eval_leaf(dom):
    b = parse_predicate("norm(p_h) > ?t [1,0,0]", dom)
    rc = partial_eval(b, mkworld(p_h=(3.0, 4.0)))
    assert shape_params(rc.shape) == ["t"]
    assert eval_residual(rc, {"t": 4.9}) is True
    assert eval_residual(rc, {"t": 5.1}) is False


def test_partial_eval_folds_action_eq(dom):
    b = And(ActionEq("start", "GoAlone"), parse_predicate("norm(p_h) > ?t [1,0,0]", dom))
    w = mkworld(p_h=(3.0, 4.0))
    rc_match = partial_eval(b, w, prev="GoAlone")
    rc_other = partial_eval(b, w, prev="Halt")
    assert eval_residual(rc_match, {"t": 1.0}) is True
    assert eval_residual(rc_other, {"t": 1.0}) is False


def test_partial_eval_conjunction_identity(dom):
    b = And(TrueP(), parse_predicate("norm(p_h) < ?t [1,0,0]", dom))
    rc = partial_eval(b, mkworld(p_h=(2.0, 0.0)))
    assert eval_residual(rc, {"t": 3.0}) is True
    assert eval_residual(rc, {"t": 1.0}) is False


theta = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@given(
    st.floats(min_value=0.0, max_value=8.0, allow_nan=False),
    st.floats(min_value=-4.0, max_value=4.0, allow_nan=False),
    theta,
    theta,
    st.sampled_from(["GoAlone", "Halt"]),
)
def test_partial_eval_soundness(hx, hy, t1, t2, prev):
    """Residual evaluation equals direct evaluation for any assignment."""
    from idips.domain import social_domain

    dom = social_domain()
    b = And(
        ActionEq("start", "GoAlone"),
        Or(
            parse_predicate("norm(p_h) > ?t1 [1,0,0]", dom),
            parse_predicate("p_h.y < ?t2 [1,0,0]", dom),
        ),
    )
    w = mkworld(p_h=(hx, hy))
    assign = {"t1": t1, "t2": t2}
    from idips.ast import substitute_params

    concrete = substitute_params(b, assign)
    from idips.evaluator import eval_predicate

    assert eval_residual(partial_eval(b, w, prev=prev), assign) == eval_predicate(
        concrete, w, prev
    )
