"""AST for action-selection policies.

A policy is an ordered list of guarded branches.  Each guard is a
predicate over the previous action and the current world state; the
first guard that holds decides the next action, and when none holds the
policy keeps the previous action.  Guards compare feature expressions
against named real-valued parameters; blank nodes (``BlankPred``,
``BlankExpr``, blank ``Param``) are holes filled in by synthesis.

All nodes are immutable; "mutation" (parameter substitution, hole
filling) builds new trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Union

from .dims import AspType, Dimension

# Distinguished action symbol naming the policy's previous action.
START = "start"

Action = str


@dataclass(frozen=True)
class Param:
    """Named threshold with a physical dimension.

    ``blank`` parameters have no value yet and are solved for; concrete
    parameters must hold a finite value.
    """

    name: str
    dim: Dimension
    value: float | None = None
    blank: bool = False

    def __post_init__(self) -> None:
        if self.blank:
            if self.value is not None:
                raise ValueError(f"blank parameter {self.name!r} must not carry a value")
        else:
            if self.value is None or not math.isfinite(self.value):
                raise ValueError(f"parameter {self.name!r} needs a finite value")

    def with_value(self, value: float) -> "Param":
        return Param(self.name, self.dim, float(value), blank=False)


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class InputVar:
    name: str
    type: AspType


@dataclass(frozen=True)
class Const:
    value: Union[float, tuple[float, float]]
    type: AspType


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class BlankExpr:
    """Hole standing for an expression of the given type."""

    type: AspType


Expr = Union[InputVar, Const, Unary, Binary, BlankExpr]


# --- predicates ------------------------------------------------------------


@dataclass(frozen=True)
class TrueP:
    pass


@dataclass(frozen=True)
class FalseP:
    pass


@dataclass(frozen=True)
class ActionEq:
    """Equality test between the previous action and a concrete action."""

    lhs: Action
    rhs: Action


@dataclass(frozen=True)
class Gt:
    expr: Expr
    param: Param


@dataclass(frozen=True)
class Lt:
    expr: Expr
    param: Param


@dataclass(frozen=True)
class And:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class Or:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class BlankPred:
    """Hole standing for a predicate."""

    pass


Predicate = Union[TrueP, FalseP, ActionEq, Gt, Lt, And, Or, BlankPred]


@dataclass(frozen=True)
class Branch:
    guard: Predicate
    result: Action


@dataclass(frozen=True)
class Policy:
    """Ordered guarded branches; falls through to "keep previous action"."""

    branches: tuple[Branch, ...] = field(default_factory=tuple)

    @staticmethod
    def of(*branches: Branch) -> "Policy":
        return Policy(tuple(branches))


# --- tree walks ------------------------------------------------------------


def expr_children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Unary):
        return (e.arg,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    return ()


def walk_exprs(e: Expr) -> Iterator[Expr]:
    yield e
    for c in expr_children(e):
        yield from walk_exprs(c)


def walk_predicates(p: Predicate) -> Iterator[Predicate]:
    yield p
    if isinstance(p, (And, Or)):
        yield from walk_predicates(p.left)
        yield from walk_predicates(p.right)


def predicate_params(p: Predicate) -> list[Param]:
    """Parameters of a predicate, in left-to-right occurrence order."""
    out: list[Param] = []
    for node in walk_predicates(p):
        if isinstance(node, (Gt, Lt)):
            out.append(node.param)
    return out


def policy_params(p: Policy) -> list[Param]:
    out: list[Param] = []
    for br in p.branches:
        out.extend(predicate_params(br.guard))
    return out


def expr_depth(e: Expr) -> int:
    """Operator nesting depth; bare inputs and constants are depth 0."""
    kids = expr_children(e)
    if not kids:
        return 0
    return 1 + max(expr_depth(k) for k in kids)


def predicate_literals(p: Predicate) -> int:
    """Number of comparison/equality/blank leaves."""
    n = 0
    for node in walk_predicates(p):
        if isinstance(node, (Gt, Lt, ActionEq, BlankPred)):
            n += 1
    return n


def has_blanks(p: Predicate) -> bool:
    for node in walk_predicates(p):
        if isinstance(node, BlankPred):
            return True
        if isinstance(node, (Gt, Lt)):
            if node.param.blank:
                return True
            if any(isinstance(s, BlankExpr) for s in walk_exprs(node.expr)):
                return True
    return False


def policy_has_blanks(p: Policy) -> bool:
    return any(has_blanks(br.guard) for br in p.branches)


def substitute_params(p: Predicate, assignment: Mapping[str, float]) -> Predicate:
    """New predicate with named parameters set to the given values."""
    if isinstance(p, (Gt, Lt)):
        if p.param.name in assignment:
            return replace(p, param=p.param.with_value(assignment[p.param.name]))
        return p
    if isinstance(p, And):
        return And(substitute_params(p.left, assignment), substitute_params(p.right, assignment))
    if isinstance(p, Or):
        return Or(substitute_params(p.left, assignment), substitute_params(p.right, assignment))
    return p


def substitute_policy_params(p: Policy, assignment: Mapping[str, float]) -> Policy:
    return Policy(
        tuple(Branch(substitute_params(b.guard, assignment), b.result) for b in p.branches)
    )


def fill_blanks(p: Predicate, fills: list[Predicate]) -> Predicate:
    """Replace blank predicates left-to-right with the given subtrees."""
    out, rest = _fill(p, list(fills))
    if rest:
        raise ValueError(f"{len(rest)} unused blank fills")
    return out


def _fill(p: Predicate, fills: list[Predicate]) -> tuple[Predicate, list[Predicate]]:
    if isinstance(p, BlankPred):
        if not fills:
            raise ValueError("not enough blank fills")
        return fills[0], fills[1:]
    if isinstance(p, And):
        left, fills = _fill(p.left, fills)
        right, fills = _fill(p.right, fills)
        return And(left, right), fills
    if isinstance(p, Or):
        left, fills = _fill(p.left, fills)
        right, fills = _fill(p.right, fills)
        return Or(left, right), fills
    return p, fills


def count_blanks(p: Predicate) -> int:
    return sum(1 for node in walk_predicates(p) if isinstance(node, BlankPred))
