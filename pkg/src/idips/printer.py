"""Canonical textual form of policies.

The printer is the inverse of the parser on concrete policies:
``parse(print(p))`` is structurally equal to ``p``.  Operator spelling is
normalized (``v_x``/``v_y`` print as ``.x``/``.y`` accessors), floats use
their shortest round-tripping representation, and parentheses follow
the parser's left associativity.
"""

from __future__ import annotations

from .ast import (
    ActionEq,
    And,
    Binary,
    BlankExpr,
    BlankPred,
    Const,
    Expr,
    FalseP,
    Gt,
    InputVar,
    Lt,
    Or,
    Param,
    Policy,
    Predicate,
    TrueP,
    Unary,
)
from .dims import Dimension, Kind

_PRED_PREC = {Or: 1, And: 2}
_EXPR_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def print_dim(d: Dimension) -> str:
    return f"[{d.length},{d.time},{d.mass}]"


def print_param(p: Param) -> str:
    if p.blank:
        return f"?{p.name} {print_dim(p.dim)}"
    return f"{p.name} {print_dim(p.dim)} = {p.value!r}"


def print_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, InputVar):
        return e.name
    if isinstance(e, Const):
        if e.type.kind is Kind.VECTOR:
            x, y = e.value
            text = f"({x!r}, {y!r})"
        else:
            text = repr(float(e.value))
        if not e.type.dim.dimensionless:
            text += f" {print_dim(e.type.dim)}"
        if isinstance(e.value, float) and e.value < 0 and parent_prec > 0:
            return f"({text})"
        return text
    if isinstance(e, BlankExpr):
        return "?expr"
    if isinstance(e, Unary):
        if e.op == "v_x":
            return f"{_postfix_base(e.arg)}.x"
        if e.op == "v_y":
            return f"{_postfix_base(e.arg)}.y"
        return f"{e.op}({print_expr(e.arg)})"
    if isinstance(e, Binary):
        prec = _EXPR_PREC.get(e.op)
        if prec is None:
            return f"{e.op}({print_expr(e.left)}, {print_expr(e.right)})"
        left = print_expr(e.left, prec)
        right = print_expr(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not an expression node: {e!r}")


def _postfix_base(e: Expr) -> str:
    # .x/.y bind tightest, so any operator expression underneath needs parens
    text = print_expr(e, 3)
    if isinstance(e, Binary) and e.op in _EXPR_PREC:
        return f"({print_expr(e)})"
    return text


def print_predicate(p: Predicate, parent_prec: int = 0) -> str:
    if isinstance(p, TrueP):
        return "true"
    if isinstance(p, FalseP):
        return "false"
    if isinstance(p, BlankPred):
        return "?"
    if isinstance(p, ActionEq):
        return f"{p.lhs} == {p.rhs}"
    if isinstance(p, Gt):
        return f"{print_expr(p.expr)} > {print_param(p.param)}"
    if isinstance(p, Lt):
        return f"{print_expr(p.expr)} < {print_param(p.param)}"
    if isinstance(p, (And, Or)):
        prec = _PRED_PREC[type(p)]
        sep = "&&" if isinstance(p, And) else "||"
        left = print_predicate(p.left, prec)
        right = print_predicate(p.right, prec + 1)
        text = f"{left} {sep} {right}"
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not a predicate node: {p!r}")


def print_policy(p: Policy) -> str:
    lines = [
        f"if ({print_predicate(br.guard)}): return {br.result}" for br in p.branches
    ]
    return "\n".join(lines) + ("\n" if lines else "")
