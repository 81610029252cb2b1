"""Dimension-aware type checking for expressions, predicates, and policies.

Scalar addition and subtraction require equal dimensions; multiplication
and division sum/difference the exponents.  Vectors support same-dimension
addition/subtraction and scaling by a scalar.  Named operators are checked
against the domain's signatures, instantiating the dimension variable at
the call site.
"""

from __future__ import annotations

from .ast import (
    START,
    ActionEq,
    And,
    Binary,
    BlankExpr,
    BlankPred,
    Branch,
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
from .dims import AspType, Kind
from .domain import DomainDefinition
from .errors import (
    ArityMismatch,
    DimensionMismatch,
    DuplicateParam,
    PolicyTypeError,
    UnknownAction,
    UnknownOperator,
    UnknownVariable,
)

ARITH_OPS = ("+", "-", "*", "/")


def typecheck_expr(e: Expr, dom: DomainDefinition) -> AspType:
    if isinstance(e, InputVar):
        declared = dom.input_type(e.name)
        if declared is None:
            raise UnknownVariable(e.name)
        if declared != e.type:
            raise DimensionMismatch(
                f"input {e.name!r} is declared {declared}, annotated {e.type}"
            )
        return declared
    if isinstance(e, Const):
        if e.type.kind is Kind.VECTOR and not isinstance(e.value, tuple):
            raise DimensionMismatch("vector constant needs two components")
        if e.type.kind is Kind.SCALAR and isinstance(e.value, tuple):
            raise DimensionMismatch("scalar constant cannot have components")
        return e.type
    if isinstance(e, BlankExpr):
        return e.type
    if isinstance(e, Unary):
        arg_t = typecheck_expr(e.arg, dom)
        if e.op in ARITH_OPS:
            raise UnknownOperator(e.op, 1)
        sig = dom.op_signature(e.op, 1)
        if sig is None:
            if dom.op_signature(e.op, 2) is not None:
                raise ArityMismatch(e.op, 2, 1)
            raise UnknownOperator(e.op, 1)
        result = sig.apply((arg_t,))
        if result is None:
            raise DimensionMismatch(f"{e.op} does not accept {arg_t}")
        return result
    if isinstance(e, Binary):
        lt = typecheck_expr(e.left, dom)
        rt = typecheck_expr(e.right, dom)
        if e.op in ARITH_OPS:
            return _arith_type(e.op, lt, rt)
        sig = dom.op_signature(e.op, 2)
        if sig is None:
            if dom.op_signature(e.op, 1) is not None:
                raise ArityMismatch(e.op, 1, 2)
            raise UnknownOperator(e.op, 2)
        result = sig.apply((lt, rt))
        if result is None:
            raise DimensionMismatch(f"{e.op} does not accept ({lt}, {rt})")
        return result
    raise PolicyTypeError(f"not an expression node: {e!r}")


def _arith_type(op: str, lt: AspType, rt: AspType) -> AspType:
    if lt.kind is Kind.BOOL or rt.kind is Kind.BOOL:
        raise DimensionMismatch(f"no arithmetic on bool ({op})")
    if op in ("+", "-"):
        if lt.kind is not rt.kind:
            raise DimensionMismatch(f"cannot {op} {lt} and {rt}")
        if lt.dim != rt.dim:
            raise DimensionMismatch(
                f"{op} requires equal dimensions, got {lt.dim} vs {rt.dim}"
            )
        return lt
    if op == "*":
        if lt.kind is Kind.SCALAR and rt.kind is Kind.SCALAR:
            return AspType(Kind.SCALAR, lt.dim * rt.dim)
        if lt.kind is Kind.SCALAR and rt.kind is Kind.VECTOR:
            return AspType(Kind.VECTOR, lt.dim * rt.dim)
        if lt.kind is Kind.VECTOR and rt.kind is Kind.SCALAR:
            return AspType(Kind.VECTOR, lt.dim * rt.dim)
        raise DimensionMismatch(f"cannot multiply {lt} by {rt}")
    if op == "/":
        if lt.kind is Kind.SCALAR and rt.kind is Kind.SCALAR:
            return AspType(Kind.SCALAR, lt.dim / rt.dim)
        raise DimensionMismatch(f"cannot divide {lt} by {rt}")
    raise UnknownOperator(op, 2)


def typecheck_predicate(p: Predicate, dom: DomainDefinition) -> None:
    if isinstance(p, (TrueP, FalseP, BlankPred)):
        return
    if isinstance(p, ActionEq):
        if p.lhs != START:
            raise PolicyTypeError(
                "action equality must compare the previous action ('start') "
                "against a concrete action"
            )
        if p.rhs not in dom.actions:
            raise UnknownAction(p.rhs)
        return
    if isinstance(p, (Gt, Lt)):
        t = typecheck_expr(p.expr, dom)
        if t.kind is not Kind.SCALAR:
            raise DimensionMismatch(f"comparison needs a scalar expression, got {t}")
        if p.param.dim != t.dim:
            raise DimensionMismatch(
                f"threshold {p.param.name!r} has dimension {p.param.dim}, "
                f"expression has {t.dim}"
            )
        return
    if isinstance(p, (And, Or)):
        typecheck_predicate(p.left, dom)
        typecheck_predicate(p.right, dom)
        return
    raise PolicyTypeError(f"not a predicate node: {p!r}")


def typecheck_policy(p: Policy, dom: DomainDefinition) -> None:
    """Validate every branch; raises a PolicyTypeError subclass on failure."""
    seen: set[str] = set()
    for br in p.branches:
        typecheck_predicate(br.guard, dom)
        if br.result not in dom.actions:
            raise UnknownAction(br.result)
        for param in _guard_params(br.guard):
            if param.name in seen:
                raise DuplicateParam(param.name)
            seen.add(param.name)


def _guard_params(p: Predicate) -> list[Param]:
    from .ast import predicate_params

    return predicate_params(p)
