"""Dimension algebra and the typechecker."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from idips.ast import (
    ActionEq,
    And,
    Binary,
    Branch,
    Const,
    Gt,
    InputVar,
    Param,
    Policy,
    TrueP,
    Unary,
)
from idips.dims import DIMENSIONLESS, LENGTH, SPEED, Dimension, Kind, scalar, vector
from idips.errors import (
    ArityMismatch,
    DimensionMismatch,
    UnknownAction,
    UnknownVariable,
)
from idips.typecheck import typecheck_expr, typecheck_policy

exponents = st.integers(min_value=-4, max_value=4)
dims = st.builds(Dimension, exponents, exponents, exponents)


@given(dims, dims, dims)
def test_dimension_group(a, b, c):
    ident = DIMENSIONLESS
    assert a * ident == a and ident * a == a
    assert a / a == ident
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert (a * b) / b == a


def test_dimensionless_is_all_zero():
    assert DIMENSIONLESS.exps() == (0, 0, 0)
    assert Dimension(1, 0, 0).dimensionless is False
    assert (LENGTH / LENGTH).dimensionless is True


def test_speed_is_length_per_time():
    assert LENGTH / SPEED == Dimension(0, 1, 0)


def _var(dom, name):
    t = dom.input_type(name)
    return InputVar(name, t)


def test_angle_is_dimensionless(dom):
    t = typecheck_expr(Unary("angle", _var(dom, "p_h")), dom)
    assert t == scalar(DIMENSIONLESS)


def test_norm_preserves_dimension(dom):
    assert typecheck_expr(Unary("norm", _var(dom, "v_h")), dom) == scalar(SPEED)
    assert typecheck_expr(Unary("norm", _var(dom, "p_h")), dom) == scalar(LENGTH)


def test_position_plus_velocity_rejected(dom):
    e = Binary("+", _var(dom, "p_h"), _var(dom, "v_h"))
    with pytest.raises(DimensionMismatch):
        typecheck_expr(e, dom)


def test_vector_sum_same_dimension_ok(dom):
    t = typecheck_expr(Binary("-", _var(dom, "p_h"), _var(dom, "p_hl")), dom)
    assert t == vector(LENGTH)


def test_product_sums_exponents(dom):
    e = Binary(
        "*",
        Unary("norm", _var(dom, "p_h")),
        Unary("norm", _var(dom, "v_h")),
    )
    t = typecheck_expr(e, dom)
    assert t.kind == Kind.SCALAR and t.dim == Dimension(2, -1, 0)


def test_quotient_subtracts_exponents(dom):
    e = Binary(
        "/",
        Unary("norm", _var(dom, "p_h")),
        Unary("norm", _var(dom, "v_h")),
    )
    assert typecheck_expr(e, dom).dim == Dimension(0, 1, 0)


def test_unknown_variable(dom):
    with pytest.raises(UnknownVariable):
        typecheck_expr(InputVar("nonsense", scalar()), dom)


def test_arity_mismatch(dom):
    with pytest.raises(ArityMismatch):
        typecheck_expr(Unary("dist", _var(dom, "p_h")), dom)


def test_free_path_length_monomorphic(dom):
    assert typecheck_expr(Unary("freePathLength", _var(dom, "p_g")), dom) == scalar(LENGTH)
    with pytest.raises(DimensionMismatch):
        typecheck_expr(Unary("freePathLength", _var(dom, "v_h")), dom)


def test_policy_unknown_action(dom):
    p = Policy((Branch(TrueP(), "Fly"),))
    with pytest.raises(UnknownAction):
        typecheck_policy(p, dom)


def test_threshold_dimension_must_match(dom):
    guard = Gt(Unary("norm", _var(dom, "p_h")), Param("th", DIMENSIONLESS, 2.0))
    p = Policy((Branch(guard, "Halt"),))
    with pytest.raises(DimensionMismatch):
        typecheck_policy(p, dom)


def test_well_typed_policy_accepted(dom):
    guard = And(
        ActionEq("start", "GoAlone"),
        Gt(Unary("norm", _var(dom, "p_h")), Param("th", LENGTH, 2.0)),
    )
    typecheck_policy(Policy((Branch(guard, "Halt"),)), dom)


def test_duplicate_param_names_rejected(dom):
    g1 = Gt(Unary("norm", _var(dom, "p_h")), Param("th", LENGTH, 2.0))
    g2 = Gt(Unary("norm", _var(dom, "p_g")), Param("th", LENGTH, 3.0))
    with pytest.raises(Exception):
        typecheck_policy(Policy((Branch(g1, "Halt"), Branch(g2, "Pass"))), dom)


def test_scalar_const_requires_dimensionless_context(dom):
    e = Binary("+", Unary("norm", _var(dom, "p_h")), Const(1.0, scalar(DIMENSIONLESS)))
    with pytest.raises(DimensionMismatch):
        typecheck_expr(e, dom)
