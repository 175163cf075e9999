from itertools import combinations

import numpy as np
import pytest

from compactknap.core import Instance, check_selection
from compactknap.instgen import build_ce, generate_instance
from compactknap.lp import (
    GE,
    INFEASIBLE,
    ITERATION_LIMIT,
    LE,
    OPTIMAL,
    SolveLimits,
    build_mkpc,
    enumerate_exact,
    solve_lp,
    solve_mip,
)


def lp_vertex_oracle(lp):
    """Optimal LP value by enumerating basic points: every intersection of
    n tight constraints drawn from the rows and the box facets."""
    n = lp.num_vars
    rows = []
    for coeffs, sense, rhs in lp.rows:
        vec = np.zeros(n)
        for k, v in coeffs.items():
            vec[k] = v
        rows.append((vec, sense, rhs))
    faces = [(vec, rhs) for vec, _, rhs in rows]
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        faces.append((e, 0.0))
        faces.append((e, 1.0))

    def feasible(x):
        if np.any(x < -1e-9) or np.any(x > 1 + 1e-9):
            return False
        for vec, sense, rhs in rows:
            v = vec @ x
            if sense == LE and v > rhs + 1e-9:
                return False
            if sense == GE and v < rhs - 1e-9:
                return False
        return True

    best = np.inf
    for combo in combinations(range(len(faces)), n):
        A = np.array([faces[k][0] for k in combo])
        b = np.array([faces[k][1] for k in combo])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, b)
        if feasible(x):
            best = min(best, float(lp.objective @ x))
    return best


# ---------------------------------------------------------------- model shape

def test_mkpc_rows_ce2():
    lp = build_mkpc(build_ce(2))
    assert len(lp.rows) == 1 + 1  # knapsack + single far pair (1, 4)
    coeffs, sense, rhs = lp.rows[1]
    assert sense == LE and rhs == 1.0
    assert coeffs == {0: 1.0, 3: 1.0, 1: -1.0, 2: -1.0}


def test_mkpc_rows_ce5_count():
    lp = build_mkpc(build_ce(5))
    assert len(lp.rows) == 1 + 28


def test_mkpc_no_pairs():
    inst = Instance(n=3, weights=(1, 1, 1), costs=(1.0,) * 3, capacity_q=2.0, delta=4)
    assert len(build_mkpc(inst).rows) == 1


# ---------------------------------------------------------------- LP relaxation

def test_lp_ce5_value():
    rep = solve_lp(build_mkpc(build_ce(5)))
    assert rep.status == OPTIMAL
    assert abs(rep.objective - 14.0 / 3.0) < 1e-6


def test_lp_ce2_value_matches_vertex_oracle():
    lp = build_mkpc(build_ce(2))
    oracle = lp_vertex_oracle(lp)
    assert abs(oracle - 8.0 / 3.0) < 1e-9  # frozen from the vertex enumeration
    rep = solve_lp(lp)
    assert abs(rep.objective - oracle) < 1e-6


def test_lp_single_knapsack_fractional():
    inst = Instance(n=4, weights=(1, 1, 1, 1), costs=(1.0,) * 4, capacity_q=3.5, delta=4)
    rep = solve_lp(build_mkpc(inst))
    assert abs(rep.objective - 3.5) < 1e-6


def test_lp_solution_respects_rows():
    lp = build_mkpc(build_ce(5))
    rep = solve_lp(lp)
    x = np.array(rep.solution.x)
    for coeffs, sense, rhs in lp.rows:
        v = sum(c * x[k] for k, c in coeffs.items())
        if sense == LE:
            assert v <= rhs + 1e-8
        else:
            assert v >= rhs - 1e-8
    assert np.all(x >= -1e-9) and np.all(x <= 1 + 1e-9)


def test_lp_infeasible():
    inst = Instance(n=2, weights=(1, 1), costs=(1.0, 1.0), capacity_q=5.0, delta=1)
    assert solve_lp(build_mkpc(inst)).status == INFEASIBLE


# ---------------------------------------------------------------- exact solvers

def test_mip_trivial_single_item():
    inst = Instance(n=1, weights=(5,), costs=(2.0,), capacity_q=5.0, delta=1)
    rep = solve_mip(build_mkpc(inst))
    assert rep.status == OPTIMAL
    assert rep.objective == 2.0
    assert rep.solution.x == (1.0,)


@pytest.mark.parametrize("m,expected", [(2, 3.0), (5, 6.0)])
def test_mip_matches_enumeration_on_family(m, expected):
    inst = build_ce(m)
    mip = solve_mip(build_mkpc(inst))
    enum = enumerate_exact(inst)
    assert mip.objective == enum.objective == expected


def test_enumeration_optimal_selection_is_feasible():
    inst = build_ce(5)
    rep = enumerate_exact(inst)
    sel = {k + 1 for k, v in enumerate(rep.solution.x) if v == 1.0}
    assert check_selection(inst, sel).feasible
    assert len(sel) == 6


def test_enumeration_infeasible_instance():
    inst = Instance(n=3, weights=(1, 1, 1), costs=(1.0,) * 3, capacity_q=9.0, delta=1)
    assert enumerate_exact(inst).status == INFEASIBLE


def test_enumeration_size_cap():
    inst = Instance(n=25, weights=(1,) * 25, costs=(1.0,) * 25, capacity_q=3.0, delta=1)
    with pytest.raises(ValueError):
        enumerate_exact(inst)


def test_mip_agrees_with_enumeration_on_seeds():
    for seed in range(12):
        inst = generate_instance(12, seed)
        mip = solve_mip(build_mkpc(inst))
        enum = enumerate_exact(inst)
        assert mip.status == enum.status == OPTIMAL
        assert mip.objective == enum.objective


def test_lp_below_mip():
    for seed in range(8):
        inst = generate_instance(14, seed + 50)
        program = build_mkpc(inst)
        lp_rep = solve_lp(program)
        mip_rep = solve_mip(program)
        assert lp_rep.objective <= mip_rep.objective + 1e-6


def test_mip_node_limit_returns_valid_bound():
    inst = generate_instance(24, 4)
    program = build_mkpc(inst)
    capped = solve_mip(program, SolveLimits(node_limit=1))
    assert capped.status in (ITERATION_LIMIT, OPTIMAL)
    full = solve_mip(program)
    assert capped.bound <= full.objective + 1e-9
    if capped.objective is not None:
        assert capped.objective >= full.objective - 1e-9
