"""Exact max-satisfaction over threshold parameters, plus minimal-change tuning.

Every literal compares an observed value against a single parameter, so a
constraint's truth is piecewise constant in each parameter with breakpoints
only at observed values.  Searching the finite candidate grid (midpoints
between consecutive observed values plus sentinels and priors) is therefore
exact with respect to the continuous optimum.

The search itself never walks constraints per grid cell.  Constraints are
grouped by shape pattern; each (constraint, satisfying truth-pattern) pair
contributes its weight on an axis-aligned box of grid indices, accumulated
into a difference array and integrated by prefix sums.  The objective over
the full grid is then a broadcast sum of per-group low-dimensional tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite
from typing import Mapping, Sequence

import numpy as np

from .ast import Action, Predicate, predicate_params
from .dims import Dimension
from .errors import SolverBudgetExceeded, TooManyParams
from .evaluator import (
    R_FALSE,
    RAnd,
    RConst,
    RLeaf,
    ROr,
    ResidualConstraint,
    RShape,
    WorldState,
    eval_shape,
    fold_residual,
    partial_eval,
    rand_,
    ror_,
)

DEFAULT_P_MAX = 4
CELL_BUDGET = 20_000_000


@dataclass(frozen=True)
class ParamSpec:
    name: str
    dim: Dimension
    prior: float | None = None


@dataclass(frozen=True)
class SolveInstance:
    params: tuple
    constraints: tuple  # of (ResidualConstraint, weight)

    def __post_init__(self):
        names = {p.name for p in self.params}
        for rc, _ in self.constraints:
            for leaf in _leaves(rc.shape):
                if leaf.param not in names:
                    raise ValueError(f"constraint references unknown parameter {leaf.param!r}")


@dataclass(frozen=True)
class SolveResult:
    assignment: dict
    satisfied_weight: float
    satisfied_count: int


def _leaves(shape: RShape) -> list:
    out: list[RLeaf] = []

    def walk(s: RShape) -> None:
        if isinstance(s, RLeaf):
            out.append(s)
        elif isinstance(s, (RAnd, ROr)):
            for c in s.children:
                walk(c)

    walk(shape)
    return out


def _drop_nan_leaves(shape: RShape) -> RShape:
    """A NaN observation satisfies neither > nor <, so its leaf is constant false."""
    if isinstance(shape, RLeaf):
        return R_FALSE if shape.value != shape.value else shape
    if isinstance(shape, RAnd):
        return rand_(_drop_nan_leaves(c) for c in shape.children)
    if isinstance(shape, ROr):
        return ror_(_drop_nan_leaves(c) for c in shape.children)
    return shape


def candidate_grid(observed, prior: float | None = None) -> list[float]:
    """Sorted threshold grid exhaustive for the optimum: a sentinel below
    the smallest observed value, midpoints between consecutive distinct
    observed values, a sentinel above the largest, and the prior if any."""
    values = sorted({v for v in observed if isfinite(v)})
    if not values:
        return [prior if prior is not None else 0.0]
    cands = [values[0] - 1.0]
    for a, b in zip(values, values[1:]):
        cands.append((a + b) / 2.0)
    cands.append(values[-1] + 1.0)
    if prior is not None:
        cands.append(prior)
    return sorted(set(cands))


def candidates(instance: SolveInstance) -> dict:
    """Per parameter, the sorted finite grid that is exhaustive for the optimum."""
    observed: dict[str, set] = {p.name: set() for p in instance.params}
    for rc, _ in instance.constraints:
        for leaf in _leaves(rc.shape):
            if isfinite(leaf.value):
                observed[leaf.param].add(leaf.value)
    return {
        spec.name: candidate_grid(observed[spec.name], spec.prior)
        for spec in instance.params
    }


def _pattern_key(shape: RShape):
    """Skeleton of a shape with leaf values stripped, for constraint grouping."""
    if isinstance(shape, RConst):
        return ("const", shape.value)
    if isinstance(shape, RLeaf):
        return ("leaf", shape.param, shape.rel)
    tag = "and" if isinstance(shape, RAnd) else "or"
    return (tag,) + tuple(_pattern_key(c) for c in shape.children)


def _shape_truth(shape: RShape, leaf_bits: Mapping[int, bool], counter: list) -> bool:
    """Evaluate a shape given truth values for its leaves in walk order."""
    if isinstance(shape, RConst):
        return shape.value
    if isinstance(shape, RLeaf):
        i = counter[0]
        counter[0] += 1
        return leaf_bits[i]
    if isinstance(shape, RAnd):
        # no short-circuit: every leaf must consume its counter slot
        bits = [_shape_truth(c, leaf_bits, counter) for c in shape.children]
        return all(bits)
    bits = [_shape_truth(c, leaf_bits, counter) for c in shape.children]
    return any(bits)


class _Group:
    """Constraints sharing one shape pattern and target truth value."""

    def __init__(self, shape: RShape, target: bool, param_index: Mapping[str, int]):
        self.leaves_proto = _leaves(shape)
        self.k = len(self.leaves_proto)
        self.axes_per_leaf = [param_index[lf.param] for lf in self.leaves_proto]
        self.axes = sorted(set(self.axes_per_leaf))
        self.rels = [lf.rel for lf in self.leaves_proto]
        self.sat_patterns = []
        for bits in range(1 << self.k):
            leaf_bits = {i: bool(bits >> i & 1) for i in range(self.k)}
            if _shape_truth(shape, leaf_bits, [0]) == target:
                self.sat_patterns.append(leaf_bits)
        self.rows: list[tuple] = []  # (leaf values tuple, weight)

    def add(self, shape: RShape, weight: float) -> None:
        self.rows.append((tuple(lf.value for lf in _leaves(shape)), weight))

    def table(self, cand_arrays: Sequence[np.ndarray]) -> np.ndarray:
        """Weight satisfied by this group as a function of its axes' indices."""
        sizes = [len(cand_arrays[a]) for a in self.axes]
        delta = np.zeros([s + 1 for s in sizes], dtype=np.float64)
        axis_of = {a: i for i, a in enumerate(self.axes)}
        for values, weight in self.rows:
            # threshold index per leaf: for '>' the leaf is true on i < t,
            # for '<' on i >= t
            ts = []
            for lf_i, v in enumerate(values):
                cand = cand_arrays[self.axes_per_leaf[lf_i]]
                if self.rels[lf_i] == ">":
                    ts.append(int(np.searchsorted(cand, v, side="left")))
                else:
                    ts.append(int(np.searchsorted(cand, v, side="right")))
            for leaf_bits in self.sat_patterns:
                lo = [0] * len(sizes)
                hi = [s for s in sizes]
                empty = False
                for lf_i in range(self.k):
                    ax = axis_of[self.axes_per_leaf[lf_i]]
                    t = ts[lf_i]
                    true_on_low = self.rels[lf_i] == ">"
                    if leaf_bits[lf_i] == true_on_low:
                        hi[ax] = min(hi[ax], t)
                    else:
                        lo[ax] = max(lo[ax], t)
                    if lo[ax] >= hi[ax]:
                        empty = True
                        break
                if empty:
                    continue
                # inclusion-exclusion corners of the box
                for corner in range(1 << len(sizes)):
                    idx = []
                    sign = 1
                    for ax in range(len(sizes)):
                        if corner >> ax & 1:
                            idx.append(hi[ax])
                            sign = -sign
                        else:
                            idx.append(lo[ax])
                    delta[tuple(idx)] += sign * weight
        for ax in range(len(sizes)):
            delta = np.cumsum(delta, axis=ax)
        return delta[tuple(slice(0, s) for s in sizes)]


def _objective(instance: SolveInstance, cand: dict):
    """Full-grid satisfied-weight array plus the constant base weight."""
    names = [p.name for p in instance.params]
    param_index = {n: i for i, n in enumerate(names)}
    cand_arrays = [np.asarray(cand[n], dtype=np.float64) for n in names]
    sizes = [len(c) for c in cand_arrays]

    base = 0.0
    groups: dict[tuple, _Group] = {}
    for rc, weight in instance.constraints:
        shape = _drop_nan_leaves(rc.shape)
        if isinstance(shape, RConst):
            if shape.value == rc.target:
                base += weight
            continue
        key = (_pattern_key(shape), rc.target)
        group = groups.get(key)
        if group is None:
            group = groups[key] = _Group(shape, rc.target, param_index)
        group.add(shape, weight)

    total_cells = 1
    for s in sizes:
        total_cells *= s
    if total_cells > CELL_BUDGET:
        raise SolverBudgetExceeded(
            f"candidate grid has {total_cells} cells (budget {CELL_BUDGET}); "
            "reduce example or parameter count"
        )

    objective = np.zeros(sizes, dtype=np.float64) if sizes else np.zeros((), dtype=np.float64)
    for group in groups.values():
        table = group.table(cand_arrays)
        shape_spec = [1] * len(sizes)
        for i, ax in enumerate(group.axes):
            shape_spec[ax] = table.shape[i]
        objective += table.reshape(shape_spec)
    return objective, base, cand_arrays, names


def _lexi_min_cell(mask: np.ndarray) -> tuple:
    """Lexicographically smallest index tuple where mask is true."""
    idx = []
    sub = mask
    for _ in range(mask.ndim):
        # collapse trailing axes: first index along axis 0 with any hit
        hits = sub.reshape(sub.shape[0], -1).any(axis=1)
        i = int(np.argmax(hits))
        idx.append(i)
        sub = sub[i]
    return tuple(idx)


def _count_satisfied(instance: SolveInstance, assignment: Mapping[str, float]):
    weight = 0.0
    count = 0
    for rc, w in instance.constraints:
        if eval_shape(_drop_nan_leaves(rc.shape), assignment) == rc.target:
            weight += w
            count += 1
    return weight, count


def _check_params(instance: SolveInstance, p_max: int) -> None:
    if len(instance.params) > p_max:
        raise TooManyParams(len(instance.params), p_max)


def max_sat(instance: SolveInstance, p_max: int = DEFAULT_P_MAX) -> SolveResult:
    """Assignment maximizing satisfied weight; ties take the smallest values."""
    _check_params(instance, p_max)
    cand = candidates(instance)
    objective, _base, cand_arrays, names = _objective(instance, cand)
    if not names:
        return SolveResult({}, *_count_satisfied(instance, {}))
    best = float(objective.max())
    cell = _lexi_min_cell(objective == best)
    assignment = {n: float(cand_arrays[i][cell[i]]) for i, n in enumerate(names)}
    weight, count = _count_satisfied(instance, assignment)
    return SolveResult(assignment, weight, count)


def srtr_optimize(instance: SolveInstance, p_max: int = DEFAULT_P_MAX) -> SolveResult:
    """Among max-satisfaction optima, the assignment closest to the priors.

    Distance is L1 normalized per parameter by max(|prior|, 1); remaining
    ties take the smallest values.
    """
    _check_params(instance, p_max)
    for spec in instance.params:
        if spec.prior is None:
            raise ValueError(f"parameter {spec.name!r} has no prior value")
    cand = candidates(instance)
    objective, _base, cand_arrays, names = _objective(instance, cand)
    if not names:
        return SolveResult({}, *_count_satisfied(instance, {}))
    priors = {p.name: p.prior for p in instance.params}
    dist_vectors = [
        np.abs(cand_arrays[i] - priors[n]) / max(abs(priors[n]), 1.0)
        for i, n in enumerate(names)
    ]
    total_dist = np.zeros(objective.shape, dtype=np.float64)
    for i, dv in enumerate(dist_vectors):
        shape_spec = [1] * len(names)
        shape_spec[i] = len(dv)
        total_dist += dv.reshape(shape_spec)

    best = float(objective.max())
    on_opt = objective == best
    best_dist = float(total_dist[on_opt].min())
    cell = _lexi_min_cell(on_opt & (total_dist == best_dist))
    assignment = {n: float(cand_arrays[i][cell[i]]) for i, n in enumerate(names)}
    weight, count = _count_satisfied(instance, assignment)
    return SolveResult(assignment, weight, count)


def build_instance(
    predicate: Predicate,
    e_pos: Sequence[WorldState],
    e_neg: Sequence[WorldState],
    prev: Action | None = None,
    frozen: Mapping[str, float] | None = None,
    priors: Mapping[str, float] | None = None,
) -> SolveInstance:
    """Fold a predicate over example sets into a solver instance.

    Parameters in `frozen` keep their given values and are eliminated; the
    rest are free, with priors taken from `priors` or from the parameter's
    own value when it has one.
    """
    frozen = dict(frozen or {})
    specs = []
    for p in predicate_params(predicate):
        if p.name in frozen:
            continue
        if priors is not None and p.name in priors:
            prior = priors[p.name]
        else:
            prior = p.value
        specs.append(ParamSpec(p.name, p.dim, prior))
    constraints = []
    for target, examples in ((True, e_pos), (False, e_neg)):
        for w in examples:
            rc = partial_eval(predicate, w, prev, target=target)
            if frozen:
                rc = fold_residual(rc, frozen)
            constraints.append((rc, 1.0))
    return SolveInstance(tuple(specs), tuple(constraints))
