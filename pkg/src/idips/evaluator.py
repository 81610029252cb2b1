"""Concrete and partial evaluation of expressions, predicates, and policies.

The partial evaluator folds a predicate on a fixed world state down to a
boolean combination over (observed value, relation, parameter) leaves, which
is what the parameter solver consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .ast import (
    Action,
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
    Policy,
    Predicate,
    TrueP,
    Unary,
)
from .errors import BlankNode, MissingInput, UnknownOperator
from .printer import print_expr

Value = Union[bool, float, tuple]

_RAY_EPS = 1e-12


@dataclass(frozen=True)
class Obstacles:
    """Static geometry in the robot frame, for free-path queries.

    segments: (x1, y1, x2, y2) wall pieces; discs: (cx, cy, radius).
    """

    segments: tuple = ()
    discs: tuple = ()

    def __bool__(self) -> bool:
        return bool(self.segments) or bool(self.discs)


class WorldState:
    """Immutable name→value map of sensor inputs, in the robot frame.

    Values are bool, float, or (x, y) float tuples.  Optional obstacle
    geometry rides along so free-path queries stay reproducible after a
    demo set is saved and reloaded.
    """

    __slots__ = ("_values", "obstacles", "_hash")

    def __init__(self, values: Mapping[str, Value], obstacles: Obstacles | None = None):
        norm: dict[str, Value] = {}
        for name, value in values.items():
            if isinstance(value, bool):
                norm[name] = value
            elif isinstance(value, (int, float)):
                norm[name] = float(value)
            else:
                x, y = value
                norm[name] = (float(x), float(y))
        self._values = norm
        self.obstacles = obstacles
        object.__setattr__(self, "_hash", None)

    def __getitem__(self, name: str) -> Value:
        try:
            return self._values[name]
        except KeyError:
            raise MissingInput(name) from None

    def get(self, name: str, default=None):
        return self._values.get(name, default)

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def names(self) -> Iterable[str]:
        return self._values.keys()

    def items(self):
        return sorted(self._values.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, WorldState):
            return NotImplemented
        return self._values == other._values and self.obstacles == other.obstacles

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((tuple(self.items()), self.obstacles))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={v!r}" for k, v in self.items())
        return f"WorldState({body})"


def _fdiv(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0:
            return math.nan
        return math.copysign(1.0, a) * math.copysign(1.0, b) * math.inf
    return a / b


def free_path_length(v: tuple, obstacles: Obstacles | None) -> float:
    """Distance from the origin along v's direction to the first obstacle.

    Capped at |v|; |v| when nothing is hit or no geometry is attached.
    """
    length = math.hypot(v[0], v[1])
    if length == 0.0 or obstacles is None or not obstacles:
        return length
    dx, dy = v[0] / length, v[1] / length
    best = length
    for x1, y1, x2, y2 in obstacles.segments:
        sx, sy = x2 - x1, y2 - y1
        denom = dx * sy - dy * sx
        if abs(denom) < _RAY_EPS:
            continue
        t = (x1 * sy - y1 * sx) / denom
        u = (x1 * dy - y1 * dx) / denom
        if t >= 0.0 and 0.0 <= u <= 1.0 and t < best:
            best = t
    for cx, cy, r in obstacles.discs:
        proj = dx * cx + dy * cy
        disc = proj * proj - (cx * cx + cy * cy - r * r)
        if disc < 0.0:
            continue
        root = math.sqrt(disc)
        t1 = proj - root
        t2 = proj + root
        if t1 >= 0.0:
            if t1 < best:
                best = t1
        elif t2 >= 0.0:
            best = 0.0
    return best


def eval_expr(e: Expr, w: WorldState) -> Value:
    if isinstance(e, InputVar):
        return w[e.name]
    if isinstance(e, Const):
        return e.value
    if isinstance(e, BlankExpr):
        raise BlankNode("cannot evaluate a blank expression")
    if isinstance(e, Unary):
        v = eval_expr(e.arg, w)
        op = e.op
        if op == "abs":
            return abs(v)
        if op == "norm":
            return math.hypot(v[0], v[1])
        if op == "v_x":
            return v[0]
        if op == "v_y":
            return v[1]
        if op == "angle":
            return math.atan2(v[1], v[0])
        if op == "freePathLength":
            return free_path_length(v, w.obstacles)
        if op == "-":
            return -v
        raise UnknownOperator(op)
    if isinstance(e, Binary):
        a = eval_expr(e.left, w)
        b = eval_expr(e.right, w)
        op = e.op
        if op == "+":
            if isinstance(a, tuple):
                return (a[0] + b[0], a[1] + b[1])
            return a + b
        if op == "-":
            if isinstance(a, tuple):
                return (a[0] - b[0], a[1] - b[1])
            return a - b
        if op == "*":
            if isinstance(a, tuple):
                return (a[0] * b, a[1] * b)
            if isinstance(b, tuple):
                return (a * b[0], a * b[1])
            return a * b
        if op == "/":
            return _fdiv(a, b)
        if op == "dist":
            return math.hypot(a[0] - b[0], a[1] - b[1])
        if op == "angleDist":
            d = math.fmod(a - b, 2.0 * math.pi)
            if d > math.pi:
                d -= 2.0 * math.pi
            elif d < -math.pi:
                d += 2.0 * math.pi
            return abs(d)
        raise UnknownOperator(op)
    raise TypeError(f"not an expression node: {e!r}")


def eval_predicate(p: Predicate, w: WorldState, prev: Action | None = None) -> bool:
    if isinstance(p, TrueP):
        return True
    if isinstance(p, FalseP):
        return False
    if isinstance(p, BlankPred):
        raise BlankNode("cannot evaluate a blank predicate")
    if isinstance(p, ActionEq):
        if prev is None:
            raise MissingInput("start")
        return prev == p.rhs
    if isinstance(p, Gt):
        if p.param.blank:
            raise BlankNode(f"parameter {p.param.name!r} has no value")
        return eval_expr(p.expr, w) > p.param.value
    if isinstance(p, Lt):
        if p.param.blank:
            raise BlankNode(f"parameter {p.param.name!r} has no value")
        return eval_expr(p.expr, w) < p.param.value
    if isinstance(p, And):
        return eval_predicate(p.left, w, prev) and eval_predicate(p.right, w, prev)
    if isinstance(p, Or):
        return eval_predicate(p.left, w, prev) or eval_predicate(p.right, w, prev)
    raise TypeError(f"not a predicate node: {p!r}")


def eval_policy(p: Policy, prev: Action, w: WorldState) -> Action:
    """First branch whose guard holds wins; no match keeps the previous action."""
    for branch in p.branches:
        if eval_predicate(branch.guard, w, prev):
            return branch.result
    return prev


def eval_policy_traced(p: Policy, prev: Action, w: WorldState):
    """Like eval_policy but also reports which branch fired (None = fall-through)."""
    for i, branch in enumerate(p.branches):
        if eval_predicate(branch.guard, w, prev):
            return branch.result, i
    return prev, None


def trace_literals(p: Predicate, w: WorldState, prev: Action | None = None) -> list:
    """Each comparison leaf of p with its evaluated left side, threshold,
    and outcome, in print order; the raw material for a decision trace."""
    out: list = []

    def walk(node: Predicate) -> None:
        if isinstance(node, (Gt, Lt)):
            lhs = eval_expr(node.expr, w)
            op = ">" if isinstance(node, Gt) else "<"
            res = lhs > node.param.value if isinstance(node, Gt) else lhs < node.param.value
            out.append(
                {
                    "lhs_text": print_expr(node.expr),
                    "lhs": lhs,
                    "op": op,
                    "param": node.param.name,
                    "threshold": node.param.value,
                    "holds": bool(res),
                }
            )
        elif isinstance(node, ActionEq):
            out.append(
                {
                    "lhs_text": "start",
                    "lhs": prev,
                    "op": "==",
                    "param": None,
                    "threshold": node.rhs,
                    "holds": prev == node.rhs,
                }
            )
        elif isinstance(node, (And, Or)):
            walk(node.left)
            walk(node.right)

    walk(p)
    return out


def score(
    b: Predicate,
    pos: Sequence[WorldState],
    neg: Sequence[WorldState],
    prev: Action | None = None,
) -> float:
    """Fraction of examples consistent with b: true on pos, false on neg."""
    total = len(pos) + len(neg)
    if total == 0:
        return 1.0
    good = 0
    for w in pos:
        if eval_predicate(b, w, prev):
            good += 1
    for w in neg:
        if not eval_predicate(b, w, prev):
            good += 1
    return good / total


# --- residual constraints -------------------------------------------------


@dataclass(frozen=True)
class RConst:
    value: bool


@dataclass(frozen=True)
class RLeaf:
    value: float
    rel: str  # '>' or '<'
    param: str


@dataclass(frozen=True)
class RAnd:
    children: tuple


@dataclass(frozen=True)
class ROr:
    children: tuple


RShape = Union[RConst, RLeaf, RAnd, ROr]

R_TRUE = RConst(True)
R_FALSE = RConst(False)


def rand_(children: Iterable[RShape]) -> RShape:
    flat: list[RShape] = []
    for c in children:
        if isinstance(c, RConst):
            if not c.value:
                return R_FALSE
            continue
        if isinstance(c, RAnd):
            flat.extend(c.children)
        else:
            flat.append(c)
    # exact duplicate children are redundant under conjunction
    dedup = [c for i, c in enumerate(flat) if c not in flat[:i]]
    if not dedup:
        return R_TRUE
    if len(dedup) == 1:
        return dedup[0]
    return RAnd(tuple(dedup))


def ror_(children: Iterable[RShape]) -> RShape:
    flat: list[RShape] = []
    for c in children:
        if isinstance(c, RConst):
            if c.value:
                return R_TRUE
            continue
        if isinstance(c, ROr):
            flat.extend(c.children)
        else:
            flat.append(c)
    dedup = [c for i, c in enumerate(flat) if c not in flat[:i]]
    if not dedup:
        return R_FALSE
    if len(dedup) == 1:
        return dedup[0]
    return ROr(tuple(dedup))


@dataclass(frozen=True)
class ResidualConstraint:
    """A folded predicate on one example plus the truth value it must take."""

    shape: RShape
    target: bool = True


def partial_eval(
    b: Predicate,
    w: WorldState,
    prev: Action | None = None,
    target: bool = True,
) -> ResidualConstraint:
    """Fold b on w to a constraint over its parameters.

    Expressions collapse to observed constants; ActionEq folds against prev.
    All named parameters stay symbolic, so the result is exact for any later
    assignment (including re-solving parameters that already have values).
    """
    return ResidualConstraint(_fold(b, w, prev), target)


def _fold(p: Predicate, w: WorldState, prev: Action | None) -> RShape:
    if isinstance(p, TrueP):
        return R_TRUE
    if isinstance(p, FalseP):
        return R_FALSE
    if isinstance(p, BlankPred):
        raise BlankNode("cannot partially evaluate a blank predicate")
    if isinstance(p, ActionEq):
        if prev is None:
            raise MissingInput("start")
        return R_TRUE if prev == p.rhs else R_FALSE
    if isinstance(p, Gt):
        return RLeaf(float(eval_expr(p.expr, w)), ">", p.param.name)
    if isinstance(p, Lt):
        return RLeaf(float(eval_expr(p.expr, w)), "<", p.param.name)
    if isinstance(p, And):
        return rand_((_fold(p.left, w, prev), _fold(p.right, w, prev)))
    if isinstance(p, Or):
        return ror_((_fold(p.left, w, prev), _fold(p.right, w, prev)))
    raise TypeError(f"not a predicate node: {p!r}")


def shape_params(shape: RShape) -> list[str]:
    """Parameter names appearing in a shape, in first-occurrence order."""
    out: list[str] = []

    def walk(s: RShape) -> None:
        if isinstance(s, RLeaf):
            if s.param not in out:
                out.append(s.param)
        elif isinstance(s, (RAnd, ROr)):
            for c in s.children:
                walk(c)

    walk(shape)
    return out


def eval_shape(shape: RShape, assignment: Mapping[str, float]) -> bool:
    if isinstance(shape, RConst):
        return shape.value
    if isinstance(shape, RLeaf):
        try:
            theta = assignment[shape.param]
        except KeyError:
            raise MissingInput(shape.param) from None
        return shape.value > theta if shape.rel == ">" else shape.value < theta
    if isinstance(shape, RAnd):
        return all(eval_shape(c, assignment) for c in shape.children)
    if isinstance(shape, ROr):
        return any(eval_shape(c, assignment) for c in shape.children)
    raise TypeError(f"not a residual shape: {shape!r}")


def eval_residual(rc: ResidualConstraint, assignment: Mapping[str, float]) -> bool:
    """Truth of the folded predicate under an assignment (ignores target)."""
    return eval_shape(rc.shape, assignment)


def satisfies(rc: ResidualConstraint, assignment: Mapping[str, float]) -> bool:
    return eval_shape(rc.shape, assignment) == rc.target


def fold_residual(rc: ResidualConstraint, fixed: Mapping[str, float]) -> ResidualConstraint:
    """Substitute values for some parameters, re-simplifying the shape.

    Used by repair to freeze the original predicate's parameters while the
    blanks' fresh parameters stay free.
    """

    def sub(s: RShape) -> RShape:
        if isinstance(s, RLeaf):
            if s.param in fixed:
                theta = fixed[s.param]
                truth = s.value > theta if s.rel == ">" else s.value < theta
                return R_TRUE if truth else R_FALSE
            return s
        if isinstance(s, RAnd):
            return rand_(sub(c) for c in s.children)
        if isinstance(s, ROr):
            return ror_(sub(c) for c in s.children)
        return s

    return ResidualConstraint(sub(rc.shape), rc.target)
