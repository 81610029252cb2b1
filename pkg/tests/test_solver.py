"""Exact max-satisfaction parameter solving against a brute-force oracle."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idips.dims import DIMENSIONLESS, LENGTH
from idips.errors import TooManyParams
from idips.evaluator import (
    RAnd,
    RLeaf,
    ROr,
    ResidualConstraint,
    eval_residual,
)
from idips.solver import (
    ParamSpec,
    SolveInstance,
    candidate_grid,
    candidates,
    max_sat,
    srtr_optimize,
)


def leaf(value, rel, param):
    return RLeaf(value, rel, param)


def rc(shape, target=True):
    return ResidualConstraint(shape, target)


def test_candidate_grid_midpoints_and_sentinels():
    assert candidate_grid([3.0, 4.0, 5.0]) == [2.0, 3.5, 4.5, 6.0]


def test_candidate_grid_single_value():
    assert candidate_grid([7.0]) == [6.0, 8.0]


def test_candidate_grid_empty():
    assert candidate_grid([]) == [0.0]
    assert candidate_grid([], prior=2.5) == [2.5]


def test_candidate_grid_includes_prior():
    assert 10.0 in candidate_grid([3.0, 5.0], prior=10.0)


def test_max_sat_two_of_three():
    # pos: x > t at x in {3, 5}; neg: not(x > t) at x = 4
    inst = SolveInstance(
        (ParamSpec("t", LENGTH),),
        (
            (rc(leaf(3.0, ">", "t")), 1.0),
            (rc(leaf(5.0, ">", "t")), 1.0),
            (rc(leaf(4.0, ">", "t"), target=False), 1.0),
        ),
    )
    res = max_sat(inst)
    assert res.satisfied_count == 2


def test_max_sat_all_satisfiable():
    inst = SolveInstance(
        (ParamSpec("t", LENGTH),),
        (
            (rc(leaf(5.0, ">", "t")), 1.0),
            (rc(leaf(1.0, ">", "t"), target=False), 1.0),
        ),
    )
    res = max_sat(inst)
    assert res.satisfied_count == 2
    assert 1.0 < res.assignment["t"] < 5.0


def test_max_sat_contradiction_pigeonhole():
    inst = SolveInstance(
        (ParamSpec("t", LENGTH),),
        (
            (rc(leaf(4.0, ">", "t")), 1.0),
            (rc(leaf(4.0, ">", "t"), target=False), 1.0),
        ),
    )
    assert max_sat(inst).satisfied_count == 1


def test_max_sat_weights():
    inst = SolveInstance(
        (ParamSpec("t", LENGTH),),
        (
            (rc(leaf(4.0, ">", "t")), 5.0),
            (rc(leaf(4.0, ">", "t"), target=False), 1.0),
        ),
    )
    res = max_sat(inst)
    assert res.satisfied_weight == 5.0
    assert eval_residual(rc(leaf(4.0, ">", "t")), res.assignment)


def test_too_many_params():
    specs = tuple(ParamSpec(f"t{i}", LENGTH) for i in range(5))
    inst = SolveInstance(specs, ())
    with pytest.raises(TooManyParams):
        max_sat(inst, p_max=4)


def test_srtr_prefers_closest_optimum():
    # optima for t: anything in (4, 5) or below 3; prior 10 picks 4.5
    inst = SolveInstance(
        (ParamSpec("t", LENGTH, prior=10.0),),
        (
            (rc(leaf(3.0, ">", "t")), 1.0),
            (rc(leaf(5.0, ">", "t")), 1.0),
            (rc(leaf(4.0, ">", "t"), target=False), 1.0),
        ),
    )
    res = srtr_optimize(inst)
    assert res.assignment["t"] == pytest.approx(4.5)


def test_srtr_keeps_optimal_prior():
    inst = SolveInstance(
        (ParamSpec("t", LENGTH, prior=2.0),),
        ((rc(leaf(5.0, ">", "t")), 1.0),),
    )
    res = srtr_optimize(inst)
    assert res.assignment["t"] == pytest.approx(2.0)


def test_srtr_tie_break_smaller_value():
    # optima symmetric around prior 4: cells (2,3) and (5,6) both satisfy 1 of 2
    inst = SolveInstance(
        (ParamSpec("t", DIMENSIONLESS, prior=4.0),),
        (
            (rc(leaf(2.5, "<", "t"), target=False), 1.0),
            (rc(leaf(5.5, ">", "t"), target=False), 1.0),
        ),
    )
    res = srtr_optimize(inst)
    res2 = srtr_optimize(inst)
    assert res.assignment == res2.assignment


def test_srtr_requires_priors():
    inst = SolveInstance((ParamSpec("t", LENGTH),), ())
    with pytest.raises(ValueError):
        srtr_optimize(inst)


# --- randomized oracle equivalence ----------------------------------------


def brute_force_best(instance: SolveInstance) -> int:
    """Independent oracle: dense grid strictly finer than any observed gap."""
    grids = []
    names = [p.name for p in instance.params]
    from idips.solver import _leaves

    for p in instance.params:
        obs = sorted(
            {
                l.value
                for rcon, _ in instance.constraints
                for l in _leaves(rcon.shape)
                if l.param == p.name
            }
        )
        if not obs:
            grids.append([0.0])
            continue
        gaps = [b - a for a, b in zip(obs, obs[1:]) if b > a]
        eps = min(gaps) / 3.0 if gaps else 1.0
        dense = []
        for v in obs:
            dense.extend([v - eps, v + eps])
        dense.extend([obs[0] - 1.0, obs[-1] + 1.0])
        grids.append(sorted(dense))
    best = 0
    for combo in itertools.product(*grids):
        assign = dict(zip(names, combo))
        got = sum(
            1
            for rcon, _ in instance.constraints
            if eval_residual(rcon, assign) == rcon.target
        )
        best = max(best, got)
    return best


def random_instance(rng: random.Random, n_params: int, n_constraints: int) -> SolveInstance:
    names = [f"t{i}" for i in range(n_params)]
    specs = tuple(ParamSpec(n, DIMENSIONLESS, prior=rng.uniform(-5, 5)) for n in names)

    def shape(depth):
        if depth == 0 or rng.random() < 0.5:
            return leaf(round(rng.uniform(-5, 5), 2), rng.choice([">", "<"]), rng.choice(names))
        cls = rng.choice([RAnd, ROr])
        return cls(tuple(shape(depth - 1) for _ in range(2)))

    cons = tuple(
        (rc(shape(rng.randint(0, 2)), target=rng.random() < 0.7), 1.0)
        for _ in range(n_constraints)
    )
    return SolveInstance(specs, cons)


@pytest.mark.parametrize("seed", range(12))
def test_oracle_equivalence(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, rng.randint(1, 3), rng.randint(1, 12))
    res = max_sat(inst)
    assert res.satisfied_count == brute_force_best(inst)


@pytest.mark.parametrize("seed", range(8))
def test_breakpoint_completeness(seed):
    """Perturbing within the winning cell never changes satisfied_count."""
    rng = random.Random(100 + seed)
    inst = random_instance(rng, rng.randint(1, 2), rng.randint(2, 10))
    res = max_sat(inst)
    cands = candidates(inst)
    for trial in range(5):
        nudged = {}
        for name, value in res.assignment.items():
            grid = cands[name]
            lo = max([c for c in grid if c < value], default=value - 1.0)
            hi = min([c for c in grid if c > value], default=value + 1.0)
            span = min(value - lo, hi - value)
            obs_vals = set()
            from idips.solver import _leaves

            for rcon, _ in inst.constraints:
                for l in _leaves(rcon.shape):
                    if l.param == name:
                        obs_vals.add(l.value)
            delta = rng.uniform(-span / 2, span / 2)
            cand = value + delta
            nudged[name] = cand if cand not in obs_vals else value
        count = sum(
            1 for rcon, _ in inst.constraints if eval_residual(rcon, nudged) == rcon.target
        )
        assert count == res.satisfied_count


@pytest.mark.parametrize("seed", range(8))
def test_monotonicity_under_constraint_removal(seed):
    rng = random.Random(200 + seed)
    inst = random_instance(rng, rng.randint(1, 2), rng.randint(2, 8))
    full = max_sat(inst).satisfied_count
    for i in range(len(inst.constraints)):
        reduced = SolveInstance(
            inst.params, inst.constraints[:i] + inst.constraints[i + 1 :]
        )
        r = max_sat(reduced).satisfied_count
        assert r >= full - 1
        assert r <= full + len(inst.constraints) - 1


@pytest.mark.parametrize("seed", range(10))
def test_srtr_never_sacrifices_satisfaction(seed):
    rng = random.Random(300 + seed)
    inst = random_instance(rng, rng.randint(1, 3), rng.randint(1, 10))
    assert srtr_optimize(inst).satisfied_count == max_sat(inst).satisfied_count
