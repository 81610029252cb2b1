"""Enumerative predicate synthesis, policy synthesis, repair, and the
demonstrate-optimize-repair loop.

Expression enumeration is dimension-pruned and layered by depth; predicate
completion is layered by (literal count, expression depth).  Every
structural candidate's parameters are solved exactly on the same midpoint
threshold grids the parameter solver uses, vectorized over example rows;
ranking runs on deterministically subsampled example sets, finalists are
re-solved on larger subsets, and reported scores are always measured on
the full example sets.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations, permutations, product

import numpy as np

from .ast import (
    ActionEq,
    And,
    Binary,
    BlankPred,
    Branch,
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
    expr_depth,
    has_blanks,
    policy_has_blanks,
    predicate_literals,
    predicate_params,
    substitute_params,
)
from .demos import LocalizedFault, _may_fire, find_predicates, policy_demo_score
from .dims import AspType, Kind
from .domain import DomainDefinition
from .errors import (
    BudgetExceeded,
    NoCandidate,
    SolverBudgetExceeded,
    TooManyParams,
)
from .evaluator import eval_expr, eval_predicate, score
from .printer import print_predicate
from .solver import (
    CELL_BUDGET,
    _lexi_min_cell,
    build_instance,
    candidate_grid,
    max_sat,
    srtr_optimize,
)
from .typecheck import typecheck_policy


@dataclass(frozen=True)
class SynthConfig:
    """Limits and budgets for synthesis and repair.

    The first five fields are the semantic knobs.  The rest bound the
    search: ranking solves run on at most search_cap examples per side
    (search_cap_3 / search_cap_4 once three or four parameters are
    involved), the rank_keep best structures of a layer are re-solved on
    subsets capped per parameter count, and multi-literal structures draw
    literals from a pool of the strongest on their own.  Candidate scores
    are always measured on the full example sets afterwards.
    """

    min_score: float = 0.95
    max_expr_depth: int = 2
    max_literals: int = 3
    max_params: int = 4
    budget: int = 50_000
    search_cap: int = 64
    search_cap_3: int = 40
    search_cap_4: int = 16
    solve_cap_2: int = 800
    solve_cap_3: int = 135
    solve_cap_4: int = 32
    rank_keep: int = 16
    pair_pool: int = 32
    triple_pool: int = 10

    def __post_init__(self):
        if not (0.0 < self.min_score <= 1.0):
            raise ValueError("min_score must be in (0, 1]")
        if self.max_expr_depth < 1:
            raise ValueError("max_expr_depth must be at least 1")


@dataclass(frozen=True)
class Candidate:
    predicate: Predicate
    score: float
    complexity: tuple


# --- expression enumeration ----------------------------------------------


def _value_key(value) -> tuple:
    if isinstance(value, tuple):
        return value
    return (value,)


def enum_all_exprs(
    dom: DomainDefinition,
    depth: int,
    examples=(),
    budget: int | None = None,
    collect_values: list | None = None,
):
    """All well-typed expressions up to the given depth, in layered order.

    Returns (expr, type, depth) triples built from inputs and the domain's
    operators only.  With examples, observationally equivalent expressions
    collapse to the first (shallowest) representative; collect_values, if
    given, receives each kept expression's value tuple over the examples.
    """
    pool: list[tuple[Expr, AspType, int]] = []
    seen: set = set()
    constructed = 0
    states = list(examples)

    def admit(e: Expr, t: AspType, d: int) -> None:
        nonlocal constructed
        constructed += 1
        if budget is not None and constructed > budget:
            raise BudgetExceeded(f"expression enumeration exceeded {budget} candidates")
        if states:
            values = tuple(_value_key(eval_expr(e, w)) for w in states)
            key = (t, values)
            if key in seen:
                return
            seen.add(key)
            if collect_values is not None:
                collect_values.append(values)
        elif collect_values is not None:
            collect_values.append(())
        pool.append((e, t, d))

    for name, t in dom.inputs:
        admit(InputVar(name, t), t, 0)

    for d in range(1, depth + 1):
        start = len(pool)
        snapshot = pool[:start]
        for op, sig in dom.unary_ops.items():
            for e, t, ed in snapshot:
                if ed != d - 1:
                    continue
                rt = sig.apply([t])
                if rt is not None:
                    admit(Unary(op, e), rt, d)
        for op, sig in dom.binary_ops.items():
            for e1, t1, d1 in snapshot:
                for e2, t2, d2 in snapshot:
                    if max(d1, d2) != d - 1:
                        continue
                    rt = sig.apply([t1, t2])
                    if rt is not None:
                        admit(Binary(op, e1, e2), rt, d)
        if len(pool) == start:
            break  # fixpoint: deeper layers cannot add anything
    return pool


def enum_exprs(dom: DomainDefinition, target: AspType, depth: int, examples=(), budget=None):
    """Expressions of exactly the target type up to depth, layered order."""
    for e, t, _d in enum_all_exprs(dom, depth, examples, budget):
        if t == target:
            yield e


# --- structural candidates ------------------------------------------------

# A completion structure is a small tree over slots:
#   ("const", bool) | ("lit", literal index) | ("fixed", fixed index)
#   | ("freelit", free index) | ("and", children) | ("or", children)
# "fixed" refers to a concrete sub-predicate of the sketch, "freelit" to a
# comparison of the sketch whose parameter is blank, "lit" to an enumerated
# (expression, relation) pair gaining a fresh parameter.


def _subsample_idx(n: int, cap: int):
    if n <= cap:
        return list(range(n))
    return list(np.linspace(0, n - 1, cap).astype(int))


def _subsample(items, cap: int):
    return [items[i] for i in _subsample_idx(len(items), cap)]


class _Literal:
    __slots__ = ("expr", "rel", "dim", "depth", "index")

    def __init__(self, expr, rel, dim, depth, index):
        self.expr = expr
        self.rel = rel
        self.dim = dim
        self.depth = depth
        self.index = index


class _ExampleSet:
    """A fixed list of world states with per-expression value caches."""

    __slots__ = ("states", "prev", "_expr_vals", "_free_vals", "_fixed_truth")

    def __init__(self, states, prev):
        self.states = states
        self.prev = prev
        self._expr_vals: dict[int, np.ndarray] = {}
        self._free_vals: dict[int, np.ndarray] = {}
        self._fixed_truth: dict[int, np.ndarray] = {}

    def __len__(self):
        return len(self.states)

    def expr_values(self, row: int, expr) -> np.ndarray:
        arr = self._expr_vals.get(row)
        if arr is None:
            arr = np.array([float(eval_expr(expr, w)) for w in self.states], dtype=np.float64)
            self._expr_vals[row] = arr
        return arr

    def free_values(self, idx: int, expr) -> np.ndarray:
        arr = self._free_vals.get(idx)
        if arr is None:
            arr = np.array([float(eval_expr(expr, w)) for w in self.states], dtype=np.float64)
            self._free_vals[idx] = arr
        return arr

    def fixed_truth(self, idx: int, pred) -> np.ndarray:
        arr = self._fixed_truth.get(idx)
        if arr is None:
            arr = np.array(
                [eval_predicate(pred, w, self.prev) for w in self.states], dtype=bool
            )
            self._fixed_truth[idx] = arr
        return arr


class _FaultContext:
    """Per-fault caches: example subsets, expression pool, value arrays."""

    def __init__(self, dom: DomainDefinition, fault: LocalizedFault, cfg: SynthConfig):
        self.dom = dom
        self.cfg = cfg
        self.prev = fault.transition[0]
        self.pos_all = list(fault.e_pos)
        self.neg_all = list(fault.e_neg)
        pos_idx = _subsample_idx(len(self.pos_all), cfg.search_cap)
        neg_idx = _subsample_idx(len(self.neg_all), cfg.search_cap)
        pos_states = [self.pos_all[i] for i in pos_idx]
        neg_states = [self.neg_all[i] for i in neg_idx]
        dedup_states = pos_states + neg_states

        values: list = []
        triples = enum_all_exprs(dom, cfg.max_expr_depth, dedup_states, cfg.budget, values)
        self.literals: list[_Literal] = []
        scalar_rows: list[tuple[Expr, int, np.ndarray]] = []
        for (e, t, d), vals in zip(triples, values):
            if t.kind is not Kind.SCALAR:
                continue
            row = len(scalar_rows)
            flat = np.array([v[0] for v in vals], dtype=np.float64) if vals else np.zeros(0)
            scalar_rows.append((e, d, flat))
            self.literals.append(_Literal(e, ">", t.dim, d, 2 * row))
            self.literals.append(_Literal(e, "<", t.dim, d, 2 * row + 1))
        self._rows = scalar_rows

        n_pos = len(pos_states)
        self.pos_s = _ExampleSet(pos_states, self.prev)
        self.neg_s = _ExampleSet(neg_states, self.prev)
        for row, (_e, _d, flat) in enumerate(scalar_rows):
            self.pos_s._expr_vals[row] = flat[:n_pos]
            self.neg_s._expr_vals[row] = flat[n_pos:]

        def narrowed(cap: int):
            ip = np.array(_subsample_idx(n_pos, cap), dtype=int)
            im = np.array(_subsample_idx(len(neg_states), cap), dtype=int)
            ps = _ExampleSet([pos_states[i] for i in ip], self.prev)
            ns = _ExampleSet([neg_states[i] for i in im], self.prev)
            for row, (_e, _d, flat) in enumerate(scalar_rows):
                ps._expr_vals[row] = flat[:n_pos][ip]
                ns._expr_vals[row] = flat[n_pos:][im]
            return ps, ns

        self.pos_s3, self.neg_s3 = narrowed(cfg.search_cap_3)
        self.pos_s4, self.neg_s4 = narrowed(cfg.search_cap_4)
        self.pos_full = _ExampleSet(self.pos_all, self.prev)
        self.neg_full = _ExampleSet(self.neg_all, self.prev)
        self._cap_sets: dict[int, tuple[_ExampleSet, _ExampleSet]] = {}

    def expr_for_row(self, row: int) -> Expr:
        return self._rows[row][0]

    def rank_sets(self, n_params: int) -> tuple[_ExampleSet, _ExampleSet]:
        if n_params >= 4:
            return self.pos_s4, self.neg_s4
        if n_params == 3:
            return self.pos_s3, self.neg_s3
        return self.pos_s, self.neg_s

    def cap_sets(self, cap: int) -> tuple[_ExampleSet, _ExampleSet]:
        got = self._cap_sets.get(cap)
        if got is None:
            if cap >= len(self.pos_all) and cap >= len(self.neg_all):
                got = (self.pos_full, self.neg_full)
            else:
                got = (
                    _ExampleSet(_subsample(self.pos_all, cap), self.prev),
                    _ExampleSet(_subsample(self.neg_all, cap), self.prev),
                )
            self._cap_sets[cap] = got
        return got


def _cap_for(cfg: SynthConfig, n_params: int) -> int:
    if n_params <= 1:
        return 4000
    if n_params == 2:
        return cfg.solve_cap_2
    if n_params == 3:
        return cfg.solve_cap_3
    return cfg.solve_cap_4


def _split_sketch(sketch: Predicate):
    """Break a sketch into a structure tree, blank slot count, fixed
    concrete sub-predicates, and comparisons with blank parameters."""
    slots = [0]
    fixed: list[Predicate] = []
    free_lits: list[tuple] = []  # (expr, rel, name, dim)

    def walk(p: Predicate):
        if isinstance(p, BlankPred):
            slot = slots[0]
            slots[0] += 1
            return ("slot", slot)
        if isinstance(p, (Gt, Lt)) and p.param.blank:
            free_lits.append(
                (p.expr, ">" if isinstance(p, Gt) else "<", p.param.name, p.param.dim)
            )
            return ("freelit", len(free_lits) - 1)
        if not has_blanks(p):
            fixed.append(p)
            return ("fixed", len(fixed) - 1)
        assert isinstance(p, (And, Or))
        return ("and" if isinstance(p, And) else "or", (walk(p.left), walk(p.right)))

    tree = walk(sketch)
    return tree, slots[0], fixed, free_lits


def _graft(tree, fills):
    tag = tree[0]
    if tag == "slot":
        return fills[tree[1]]
    if tag in ("and", "or"):
        return (tag, tuple(_graft(c, fills) for c in tree[1]))
    return tree


def _structure_literal_indices(node) -> list[int]:
    tag = node[0]
    if tag == "lit":
        return [node[1]]
    if tag in ("and", "or"):
        out = []
        for c in node[1]:
            out.extend(_structure_literal_indices(c))
        return out
    return []


def _fresh_names(k: int, avoid) -> list[str]:
    names = []
    i = 0
    while len(names) < k:
        name = f"q{i}"
        if name not in avoid:
            names.append(name)
        i += 1
    return names


@dataclass
class _Struct:
    fills: tuple
    lit_indices: tuple
    n_lits: int
    total_depth: int
    order: int


def _slot_layer(lits, l: int):
    """Completion structures of exactly l literals for one blank slot,
    as (node, total expression depth) pairs."""
    if l == 0:
        return [(("const", True), 0), (("const", False), 0)]
    if l == 1:
        return [(("lit", lit.index), lit.depth) for lit in lits]
    if l == 2:
        out = []
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                a, b = lits[i], lits[j]
                d = a.depth + b.depth
                la, lb = ("lit", a.index), ("lit", b.index)
                out.append((("and", (la, lb)), d))
                out.append((("or", (la, lb)), d))
        return out
    if l == 3:
        out = []
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                for k in range(j + 1, len(lits)):
                    a, b, c = lits[i], lits[j], lits[k]
                    d = a.depth + b.depth + c.depth
                    la, lb, lc = ("lit", a.index), ("lit", b.index), ("lit", c.index)
                    out.append((("and", (("and", (la, lb)), lc)), d))
                    out.append((("or", (("or", (la, lb)), lc)), d))
                    for inner, outer in (((la, lb), lc), ((la, lc), lb), ((lb, lc), la)):
                        out.append((("or", (("and", inner), outer)), d))
                        out.append((("and", (("or", inner), outer)), d))
        return out
    return []


def _slot_assignments(n_slots: int, n_lits: int, pool, consts):
    """All placements of n_lits distinct pool literals into n_slots, the
    remaining slots taking constants; deterministic order."""
    slots = range(n_slots)
    for lit_slots in combinations(slots, n_lits):
        const_slots = [s for s in slots if s not in lit_slots]
        for lits in permutations(pool, n_lits):
            for const_choice in product(consts, repeat=len(const_slots)):
                fills = [None] * n_slots
                for s, lit in zip(lit_slots, lits):
                    fills[s] = ("lit", lit.index)
                for s, c in zip(const_slots, const_choice):
                    fills[s] = c
                yield tuple(fills)


def _pred_total_depth(p: Predicate) -> int:
    total = 0
    stack = [p]
    while stack:
        node = stack.pop()
        if isinstance(node, (And, Or)):
            stack.extend((node.left, node.right))
        elif isinstance(node, (Gt, Lt)):
            total += expr_depth(node.expr)
    return total


class _Completer:
    """Solves and scores completion structures for one sketch and fault.

    Parameter solving mirrors the generic solver exactly: the same
    candidate grids, the same objective over grid cells, and the same
    lexicographic tie-breaking; it is merely vectorized over example rows
    for the fixed shapes synthesis explores.
    """

    def __init__(self, ctx: _FaultContext, sketch: Predicate):
        self.ctx = ctx
        self.tree, self.n_slots, self.fixed, self.free_lits = _split_sketch(sketch)
        self.free_names = [name for _e, _r, name, _d in self.free_lits]
        self._grid_cache: dict = {}
        self._t_cache: dict = {}

    # axis = one solved parameter: an enumerated literal or a free literal

    def _axis_values(self, axis, exset: _ExampleSet) -> np.ndarray:
        kind, ref = axis
        if kind == "lit":
            return exset.expr_values(ref // 2, self.ctx.literals[ref].expr)
        return exset.free_values(ref, self.free_lits[ref][0])

    def _axis_rel(self, axis) -> str:
        kind, ref = axis
        if kind == "lit":
            return self.ctx.literals[ref].rel
        return self.free_lits[ref][1]

    def _axis_grid(self, axis, pos: _ExampleSet, neg: _ExampleSet) -> np.ndarray:
        kind, ref = axis
        row = ref // 2 if kind == "lit" else ref
        key = (kind, row, id(pos), id(neg))
        grid = self._grid_cache.get(key)
        if grid is None:
            vp = self._axis_values(axis, pos)
            vn = self._axis_values(axis, neg)
            both = np.concatenate([vp, vn])
            grid = np.array(candidate_grid(both[np.isfinite(both)].tolist()))
            self._grid_cache[key] = grid
        return grid

    def _axis_t(self, axis, grid, exset: _ExampleSet) -> np.ndarray:
        """Per row, the grid split index: for '>' the leaf is true on cells
        [0, t); for '<' on [t, n)."""
        rel = self._axis_rel(axis)
        kind, ref = axis
        key = (kind, ref, rel, id(exset))
        t = self._t_cache.get(key)
        if t is None:
            v = self._axis_values(axis, exset)
            side = "left" if rel == ">" else "right"
            t = np.searchsorted(grid, v, side=side)
            self._t_cache[key] = t
        return t

    def _axes_of(self, struct: _Struct):
        lit_axes = [("lit", li) for li in struct.lit_indices]
        free_axes = [("free", i) for i in range(len(self.free_lits))]
        return lit_axes + free_axes

    def solve(self, struct: _Struct, pos: _ExampleSet, neg: _ExampleSet, want_theta: bool):
        """Exact max-sat over the candidate grids; returns (count, theta)."""
        ctx = self.ctx
        grafted = _graft(self.tree, struct.fills)
        axes = self._axes_of(struct)
        n_ax = len(axes)
        axis_id = {axes[j]: j for j in range(n_ax)}

        grids = [self._axis_grid(ax, pos, neg) for ax in axes]
        sizes = [len(g) for g in grids]
        cells = 1
        for s in sizes:
            cells *= s
        if cells > CELL_BUDGET:
            raise SolverBudgetExceeded(
                f"candidate grid has {cells} cells (budget {CELL_BUDGET}); "
                "reduce example or parameter count"
            )

        n_fixed = len(self.fixed)
        base = 0
        diff = np.zeros([s + 1 for s in sizes]) if n_ax else None

        for exset, target in ((pos, True), (neg, False)):
            n = len(exset)
            if n == 0:
                continue
            codes = np.zeros(n, dtype=np.int64)
            for i in range(n_fixed):
                codes |= exset.fixed_truth(i, self.fixed[i]).astype(np.int64) << i
            t_arrs = []
            for j, ax in enumerate(axes):
                v = self._axis_values(ax, exset)
                codes |= np.isnan(v).astype(np.int64) << (n_fixed + j)
                t_arrs.append(self._axis_t(ax, grids[j], exset))
            for code in np.unique(codes):
                rows = np.nonzero(codes == code)[0]
                reduced = self._fold(grafted, int(code), n_fixed, axis_id)
                if isinstance(reduced, bool):
                    if reduced == target:
                        base += len(rows)
                    continue
                weight = 1 if target else -1
                if not target:
                    base += len(rows)
                used = sorted(set(self._reduced_axes(reduced)))
                zeros = np.zeros(len(rows), dtype=np.int64)
                for bits in range(1 << len(used)):
                    truth = {ax: bool(bits >> i & 1) for i, ax in enumerate(used)}
                    if not self._eval_reduced(reduced, truth):
                        continue
                    lo, hi = [], []
                    for j in range(n_ax):
                        # bounds stay per-row arrays so add.at accumulates
                        # one corner per example
                        full = np.full(len(rows), sizes[j], dtype=np.int64)
                        if j in truth:
                            t = t_arrs[j][rows]
                            # '>' true on [0,t), '<' true on [t,n); the
                            # complement of either is the other interval
                            low_side = (self._axis_rel(axes[j]) == ">") == truth[j]
                            lo.append(zeros if low_side else t)
                            hi.append(t if low_side else full)
                        else:
                            lo.append(zeros)
                            hi.append(full)
                    for corner in range(1 << n_ax):
                        idx = tuple(
                            hi[j] if corner >> j & 1 else lo[j] for j in range(n_ax)
                        )
                        sign = -1 if bin(corner).count("1") % 2 else 1
                        np.add.at(diff, idx, sign * weight)

        if n_ax == 0:
            return base, ({} if want_theta else None)
        for axn in range(n_ax):
            np.cumsum(diff, axis=axn, out=diff)
        objective = diff[tuple(slice(0, s) for s in sizes)]
        best = float(objective.max())
        count = base + int(round(best))
        if not want_theta:
            return count, None
        cell = _lexi_min_cell(objective == best)
        names = self._axis_names(struct)
        theta = {names[j]: float(grids[j][cell[j]]) for j in range(n_ax)}
        return count, theta

    def _fold(self, node, code: int, n_fixed: int, axis_id):
        """Reduce a structure for one row-variant: fixed parts and NaN
        leaves become constants; returns a bool or a tree over axis ids."""
        tag = node[0]
        if tag == "const":
            return node[1]
        if tag == "fixed":
            return bool(code >> node[1] & 1)
        if tag in ("lit", "freelit"):
            ax = axis_id[(("lit", node[1]) if tag == "lit" else ("free", node[1]))]
            if code >> (n_fixed + ax) & 1:
                return False  # NaN compares false
            return ("ax", ax)
        kids = [self._fold(c, code, n_fixed, axis_id) for c in node[1]]
        if tag == "and":
            if any(k is False for k in kids):
                return False
            kids = [k for k in kids if k is not True]
            if not kids:
                return True
        else:
            if any(k is True for k in kids):
                return True
            kids = [k for k in kids if k is not False]
            if not kids:
                return False
        if len(kids) == 1:
            return kids[0]
        return (tag, tuple(kids))

    def _reduced_axes(self, node) -> list[int]:
        if node[0] == "ax":
            return [node[1]]
        out = []
        for c in node[1]:
            out.extend(self._reduced_axes(c))
        return out

    def _eval_reduced(self, node, truth) -> bool:
        if node[0] == "ax":
            return truth[node[1]]
        if node[0] == "and":
            return all(self._eval_reduced(c, truth) for c in node[1])
        return any(self._eval_reduced(c, truth) for c in node[1])

    def _axis_names(self, struct: _Struct) -> list[str]:
        fresh = _fresh_names(len(struct.lit_indices), set(self.free_names))
        return fresh + self.free_names

    def n_params(self, struct: _Struct) -> int:
        return len(struct.lit_indices) + len(self.free_lits)

    def _truth(self, node, theta, exset: _ExampleSet, names, counter) -> np.ndarray:
        tag = node[0]
        n = len(exset)
        if tag == "const":
            return np.full(n, node[1], dtype=bool)
        if tag == "lit":
            lit = self.ctx.literals[node[1]]
            name = names[counter[0]]
            counter[0] += 1
            vals = exset.expr_values(node[1] // 2, lit.expr)
            return vals > theta[name] if lit.rel == ">" else vals < theta[name]
        if tag == "freelit":
            expr, rel, name, _dim = self.free_lits[node[1]]
            vals = exset.free_values(node[1], expr)
            return vals > theta[name] if rel == ">" else vals < theta[name]
        if tag == "fixed":
            return exset.fixed_truth(node[1], self.fixed[node[1]])
        parts = [self._truth(c, theta, exset, names, counter) for c in node[1]]
        acc = parts[0]
        for p in parts[1:]:
            acc = (acc & p) if tag == "and" else (acc | p)
        return acc

    def rank(self, struct: _Struct) -> float:
        """Exact satisfaction rate on the search subsets."""
        k = self.n_params(struct)
        if k > self.ctx.cfg.max_params:
            return -1.0
        pos, neg = self.ctx.rank_sets(k)
        total = len(pos) + len(neg)
        if total == 0:
            return 1.0
        count, _ = self.solve(struct, pos, neg, want_theta=False)
        return count / total

    def solve_full(self, struct: _Struct):
        """Solve on capped sets, then score on the full sets."""
        ctx = self.ctx
        k = self.n_params(struct)
        if k > ctx.cfg.max_params:
            return None
        if k:
            pos_v, neg_v = ctx.cap_sets(_cap_for(ctx.cfg, k))
            _count, theta = self.solve(struct, pos_v, neg_v, want_theta=True)
        else:
            theta = {}
        names = self._axis_names(struct)
        grafted = _graft(self.tree, struct.fills)
        total = len(ctx.pos_full) + len(ctx.neg_full)
        if total == 0:
            return theta, names, 1.0
        good = 0
        if len(ctx.pos_full):
            good += int(self._truth(grafted, theta, ctx.pos_full, names, [0]).sum())
        if len(ctx.neg_full):
            good += len(ctx.neg_full) - int(
                self._truth(grafted, theta, ctx.neg_full, names, [0]).sum()
            )
        return theta, names, good / total

    def build(self, struct: _Struct, theta, names) -> Predicate:
        def rec(node, counter):
            tag = node[0]
            if tag == "const":
                return TrueP() if node[1] else FalseP()
            if tag == "lit":
                lit = self.ctx.literals[node[1]]
                name = names[counter[0]]
                counter[0] += 1
                param = Param(name, lit.dim, theta[name])
                return Gt(lit.expr, param) if lit.rel == ">" else Lt(lit.expr, param)
            if tag == "freelit":
                expr, rel, name, dim = self.free_lits[node[1]]
                param = Param(name, dim, theta[name])
                return Gt(expr, param) if rel == ">" else Lt(expr, param)
            if tag == "fixed":
                return self.fixed[node[1]]
            kids = [rec(c, counter) for c in node[1]]
            return (And if tag == "and" else Or)(kids[0], kids[1])

        return rec(_graft(self.tree, struct.fills), [0])


def synth_predicate(
    dom: DomainDefinition,
    fault: LocalizedFault,
    cfg: SynthConfig,
    sketch: Predicate,
) -> Candidate:
    """Complete a sketch's blanks against the fault's example sets.

    Blank predicates are completed with enumerated structures layered by
    literal count then expression depth; all fresh and blank parameters
    are solved exactly.  Returns the best candidate overall by score,
    ties broken by lower complexity, then canonical printed form, then
    enumeration order; the search ends early only once a layer produced a
    perfect score, which no later (higher-complexity) layer could beat.
    Concrete parameters already present in the sketch stay frozen inside
    their sub-predicates.
    """
    if not has_blanks(sketch):
        s = score(sketch, fault.e_pos, fault.e_neg, prev=fault.transition[0])
        return Candidate(sketch, s, (predicate_literals(sketch), _pred_total_depth(sketch)))

    ctx = _FaultContext(dom, fault, cfg)
    comp = _Completer(ctx, sketch)
    n_slots = comp.n_slots

    order_counter = [0]

    def make_struct(fills) -> _Struct:
        lit_idx = []
        depth_sum = 0
        for f in fills:
            for li in _structure_literal_indices(f):
                lit_idx.append(li)
                depth_sum += ctx.literals[li].depth
        st = _Struct(tuple(fills), tuple(lit_idx), len(lit_idx), depth_sum, order_counter[0])
        order_counter[0] += 1
        return st

    best: Candidate | None = None
    best_key = None

    def consider(structs, pre_ranked=None) -> None:
        """Rank a layer, re-solve the finalists, track the best candidate."""
        nonlocal best, best_key
        if pre_ranked is None:
            scored = []
            for st in structs:
                rs = comp.rank(st)
                if rs >= 0.0:
                    scored.append((rs, st))
        else:
            scored = [t for t in pre_ranked if t[0] >= 0.0]
        scored.sort(key=lambda t: (-t[0], t[1].order))
        for _rs, st in scored[: cfg.rank_keep]:
            out = comp.solve_full(st)
            if out is None:
                continue
            theta, names, full_score = out
            pred = comp.build(st, theta, names)
            cand = Candidate(pred, full_score, (predicate_literals(pred), _pred_total_depth(pred)))
            key = (-cand.score, cand.complexity, print_predicate(pred), st.order)
            if best_key is None or key < best_key:
                best, best_key = cand, key

    if n_slots == 0:
        # only blank parameters to solve: a single structural candidate
        st = make_struct(())
        if len(comp.free_lits) > cfg.max_params:
            raise TooManyParams(len(comp.free_lits), cfg.max_params)
        theta, names, full_score = comp.solve_full(st)
        pred = comp.build(st, theta, names)
        return Candidate(pred, full_score, (predicate_literals(pred), _pred_total_depth(pred)))

    max_l = min(cfg.max_literals, cfg.max_params - len(comp.free_lits))
    if max_l < 0:
        raise TooManyParams(len(comp.free_lits), cfg.max_params)

    # solo pass: every literal alone, giving both the single-literal layer
    # and the ranking that trims multi-literal pools
    solo: list[tuple[float, _Struct]] = []
    solo_rank: dict[int, float] = {}
    if max_l >= 1 and ctx.literals:
        if n_slots == 1:
            for node, _d in sorted(_slot_layer(ctx.literals, 1), key=lambda t: t[1]):
                st = make_struct((node,))
                rs = comp.rank(st)
                solo.append((rs, st))
                solo_rank[node[1]] = rs
        else:
            # probe each literal in the first slot (others False) and the
            # last slot (others True): both roles of a mixed-fault sketch
            for lit in ctx.literals:
                first = make_struct(
                    (("lit", lit.index),) + (("const", False),) * (n_slots - 1)
                )
                last = make_struct(
                    (("const", True),) * (n_slots - 1) + (("lit", lit.index),)
                )
                r1, r2 = comp.rank(first), comp.rank(last)
                solo.append((r1, first))
                solo.append((r2, last))
                solo_rank[lit.index] = max(r1, r2)

    ranked = sorted(
        ctx.literals, key=lambda l: (-solo_rank.get(l.index, -1.0), l.index)
    )

    for l in range(0, max_l + 1):
        if n_slots == 1:
            if l == 1:
                consider(None, pre_ranked=solo)
            else:
                lits = ctx.literals if l == 0 else (
                    ranked[: cfg.pair_pool] if l == 2 else ranked[: cfg.triple_pool]
                )
                consider(
                    [
                        make_struct((node,))
                        for node, _d in sorted(_slot_layer(lits, l), key=lambda t: t[1])
                    ]
                )
        else:
            if l == 0:
                consider(
                    [
                        make_struct(fills)
                        for fills in product(
                            (("const", True), ("const", False)), repeat=n_slots
                        )
                    ]
                )
            elif l == 1:
                consider(None, pre_ranked=solo)
            else:
                pool = ranked[: cfg.triple_pool]
                consider(
                    [
                        make_struct(fills)
                        for fills in _slot_assignments(
                            n_slots, min(l, n_slots), pool,
                            (("const", True), ("const", False)),
                        )
                    ]
                )
        if best is not None and best.score == 1.0:
            break

    if best is None:
        raise NoCandidate("no completion available under the configured budget")
    return best


# --- policy synthesis -----------------------------------------------------


def _rename_params(pred: Predicate, taken: set) -> Predicate:
    """Rename parameters whose names are not yet taken to fresh thN names;
    parameters already named in taken (the existing policy's) are kept."""
    keep = frozenset(taken)
    mapping: dict[str, str] = {}
    counter = [1]

    def fresh() -> str:
        while f"th{counter[0]}" in taken:
            counter[0] += 1
        name = f"th{counter[0]}"
        taken.add(name)
        return name

    def walk(p: Predicate) -> Predicate:
        if isinstance(p, (Gt, Lt)):
            old = p.param.name
            if old in keep:
                return p
            if old not in mapping:
                mapping[old] = fresh()
            return replace(p, param=replace(p.param, name=mapping[old]))
        if isinstance(p, And):
            return And(walk(p.left), walk(p.right))
        if isinstance(p, Or):
            return Or(walk(p.left), walk(p.right))
        return p

    return walk(pred)


def synthesize(
    dom: DomainDefinition,
    demos,
    p0: Policy | None = None,
    cfg: SynthConfig | None = None,
) -> Policy:
    """Create branches for demonstrated transitions the policy lacks.

    Existing branches are kept verbatim and first; new branches follow,
    grouped by previous action in domain order, ordered within a group by
    descending demonstration support with ties broken by action name.  A
    nonempty policy already reproducing the demos at min_score is returned
    unchanged.
    """
    cfg = cfg or SynthConfig()
    p0 = p0 or Policy(())
    if (
        p0.branches
        and not policy_has_blanks(p0)
        and policy_demo_score(p0, demos) >= cfg.min_score
    ):
        return p0
    faults = find_predicates(demos, p0)
    created = []
    for fault in faults:
        if fault.has_branch or not fault.e_pos:
            continue
        a1, a2 = fault.transition
        try:
            cand = synth_predicate(dom, fault, cfg, fault.predicate)
        except NoCandidate as e:
            raise NoCandidate(f"transition {a1}->{a2}: {e}") from None
        created.append((a1, a2, len(fault.e_pos), cand))

    action_order = {a: i for i, a in enumerate(dom.actions)}
    created.sort(key=lambda t: (action_order.get(t[0], len(action_order)), -t[2], t[1]))

    taken = {p.name for b in p0.branches for p in predicate_params(b.guard)}
    branches = list(p0.branches)
    for a1, a2, _support, cand in created:
        branches.append(Branch(_rename_params(cand.predicate, taken), a2))
    policy = Policy(tuple(branches))
    typecheck_policy(policy, dom)
    return policy


def optimize_params(
    dom: DomainDefinition,
    demos,
    policy: Policy,
    cfg: SynthConfig | None = None,
) -> Policy:
    """Re-fit branch parameters to the demonstrations, structure fixed.

    Blank parameters are filled by consistency maximization; concrete ones
    move only if the least-displacement re-fit does not lose accuracy on
    the branch's attributed examples.  Branches without parameters or
    without attributable examples stay as they are.
    """
    cfg = cfg or SynthConfig()
    branches = list(policy.branches)
    for fault in find_predicates(demos, policy):
        a1, a2 = fault.transition
        idx = _branch_index(branches, a1, a2)
        if idx is None:
            continue
        guard = branches[idx].guard
        params = predicate_params(guard)
        if not params:
            continue
        blanks = [q for q in params if q.blank]
        cap = _cap_for(cfg, len(params))
        e_pos = _subsample(list(fault.e_pos), cap)
        e_neg = _subsample(list(fault.e_neg), cap)
        if blanks:
            frozen = {q.name: q.value for q in params if not q.blank}
            inst = build_instance(guard, e_pos, e_neg, prev=a1, frozen=frozen)
            res = max_sat(inst, p_max=cfg.max_params)
            branches[idx] = Branch(substitute_params(guard, res.assignment), a2)
            continue
        inst = build_instance(guard, e_pos, e_neg, prev=a1)
        res = srtr_optimize(inst, p_max=cfg.max_params)
        tuned = substitute_params(guard, res.assignment)
        if score(tuned, fault.e_pos, fault.e_neg, prev=a1) >= score(
            guard, fault.e_pos, fault.e_neg, prev=a1
        ):
            branches[idx] = Branch(tuned, a2)
    return Policy(tuple(branches))


# --- repair ---------------------------------------------------------------


def repair(
    dom: DomainDefinition, fault: LocalizedFault, cfg: SynthConfig | None = None
) -> Candidate:
    """Minimal structural extension of a faulty guard.

    A guard missing positives is weakened with a disjunct, one accepting
    negatives is strengthened with a conjunct, and a guard doing both gets
    a tightening conjunct plus an alternative clause.  The guard's own
    structure and parameter values stay frozen; constant completions
    guarantee the result never scores below the unmodified guard.
    """
    cfg = cfg or SynthConfig()
    b = fault.predicate
    prev = fault.transition[0]
    false_neg = score(b, fault.e_pos, (), prev=prev) < 1.0
    false_pos = score(b, (), fault.e_neg, prev=prev) < 1.0
    if not false_neg and not false_pos:
        return Candidate(b, 1.0, (predicate_literals(b), _pred_total_depth(b)))
    if false_neg and false_pos:
        sketch = Or(And(b, BlankPred()), And(BlankPred(), BlankPred()))
    elif false_neg:
        sketch = Or(b, BlankPred())
    else:
        sketch = And(b, BlankPred())
    return synth_predicate(dom, fault, cfg, sketch)


# --- the full loop --------------------------------------------------------


@dataclass(frozen=True)
class RepairEntry:
    transition: tuple
    stage: str  # none | optimized | repaired
    before_score: float
    after_score: float
    before_text: str
    after_text: str


@dataclass(frozen=True)
class IdipsResult:
    policy: Policy
    report: tuple
    policy_score_before: float
    policy_score_after: float


def _split_start_gate(guard: Predicate) -> tuple:
    """A branch guard split into its start-action gate and the rest."""
    if isinstance(guard, And) and isinstance(guard.left, ActionEq):
        return guard.left, guard.right
    if isinstance(guard, ActionEq):
        return guard, TrueP()
    return None, guard


def _branch_index(branches, a1, a2) -> int | None:
    """Index of the branch a demonstration pair is attributed to: the first
    branch per resulting action that can fire after a1."""
    seen_results = set()
    for i, b in enumerate(branches):
        if b.result in seen_results:
            continue
        if _may_fire(b.guard, a1):
            if b.result == a2:
                return i
            seen_results.add(b.result)
    return None


def idips(
    dom: DomainDefinition,
    demos,
    p0: Policy | None = None,
    cfg: SynthConfig | None = None,
) -> IdipsResult:
    """Synthesize missing branches, then per faulty guard re-fit parameters
    and, if still failing, extend structure, against the demonstrations."""
    cfg = cfg or SynthConfig()
    p0 = p0 or Policy(())
    if not policy_has_blanks(p0):
        score_before = policy_demo_score(p0, demos)
        if p0.branches and score_before >= cfg.min_score:
            return IdipsResult(p0, (), score_before, score_before)
    else:
        score_before = 0.0

    p = synthesize(dom, demos, p0, cfg)
    branches = list(p.branches)
    report: list[RepairEntry] = []
    taken = {q.name for b in branches for q in predicate_params(b.guard)}

    for fault in find_predicates(demos, Policy(tuple(branches))):
        a1, a2 = fault.transition
        idx = _branch_index(branches, a1, a2)
        if idx is None:
            continue
        guard = branches[idx].guard
        before_text = print_predicate(guard)
        params = predicate_params(guard)
        blanks = [q for q in params if q.blank]
        did_fit = False
        if blanks:
            # a hand-written guard with blank parameters: fit them first
            frozen = {q.name: q.value for q in params if not q.blank}
            cap = _cap_for(cfg, len(blanks))
            inst = build_instance(
                guard,
                _subsample(list(fault.e_pos), cap),
                _subsample(list(fault.e_neg), cap),
                prev=a1,
                frozen=frozen,
            )
            res = max_sat(inst, p_max=cfg.max_params)
            guard = substitute_params(guard, res.assignment)
            branches[idx] = Branch(guard, a2)
            did_fit = True
        s0 = score(guard, fault.e_pos, fault.e_neg, prev=a1)
        before_score = 0.0 if blanks else s0
        if s0 >= cfg.min_score:
            stage = "optimized" if did_fit else "none"
            report.append(
                RepairEntry((a1, a2), stage, before_score, s0, before_text, print_predicate(guard))
            )
            continue

        s_cur = s0
        if params and not blanks:
            cap = _cap_for(cfg, len(params))
            inst = build_instance(
                guard,
                _subsample(list(fault.e_pos), cap),
                _subsample(list(fault.e_neg), cap),
                prev=a1,
            )
            res = srtr_optimize(inst, p_max=cfg.max_params)
            tuned = substitute_params(guard, res.assignment)
            s1 = score(tuned, fault.e_pos, fault.e_neg, prev=a1)
            if s1 > s_cur:
                guard, s_cur = tuned, s1
                branches[idx] = Branch(guard, a2)
            if s_cur >= cfg.min_score:
                report.append(
                    RepairEntry(
                        (a1, a2), "optimized", before_score, s_cur,
                        before_text, print_predicate(guard),
                    )
                )
                continue

        # repair templates wrap the predicate only; the start gate must stay
        # outermost or the new disjunct fires for unrelated prev actions
        gate, body = _split_start_gate(guard)
        fault_now = LocalizedFault((a1, a2), body, fault.e_pos, fault.e_neg, has_branch=True)
        cand = repair(dom, fault_now, cfg)
        if cand.score > s_cur:
            repaired = _rename_params(cand.predicate, taken)
            new_guard = And(gate, repaired) if gate is not None else repaired
            branches[idx] = Branch(new_guard, a2)
            report.append(
                RepairEntry(
                    (a1, a2), "repaired", before_score, cand.score,
                    before_text, print_predicate(new_guard),
                )
            )
        else:
            report.append(
                RepairEntry(
                    (a1, a2), "repaired", before_score, s_cur,
                    before_text, print_predicate(guard),
                )
            )

    policy = Policy(tuple(branches))
    typecheck_policy(policy, dom)
    score_after = policy_demo_score(policy, demos)
    return IdipsResult(policy, tuple(report), score_before, score_after)


def report_to_json(result: IdipsResult) -> dict:
    return {
        "v": 1,
        "policy_score_before": result.policy_score_before,
        "policy_score_after": result.policy_score_after,
        "entries": [
            {
                "transition": list(e.transition),
                "stage": e.stage,
                "before_score": e.before_score,
                "after_score": e.after_score,
                "diff": f"{e.before_text} -> {e.after_text}",
            }
            for e in result.report
        ],
    }
