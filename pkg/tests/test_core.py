import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compactknap.core import (
    Instance,
    PairCoefficient,
    check_selection,
    compactness_pairs,
    complement_instance,
    instance_from_json,
    instance_to_json,
    validate_instance,
)
from compactknap.instgen import build_ce


def toy(n=7, delta=2, q=4.0, weights=None, costs=None):
    return Instance(
        n=n,
        weights=weights or (1,) * n,
        costs=costs or (1.0,) * n,
        capacity_q=q,
        delta=delta,
    )


# ---------------------------------------------------------------- validation

def test_validate_trivial_ok():
    inst = Instance(n=1, weights=(5,), costs=(2.0,), capacity_q=5.0, delta=1)
    assert validate_instance(inst) == []


def test_validate_total_weight_short():
    inst = Instance(n=2, weights=(1, 1), costs=(1.0, 1.0), capacity_q=3.0, delta=1)
    problems = validate_instance(inst)
    assert any("total weight" in p for p in problems)


def test_validate_generated_family():
    assert validate_instance(build_ce(5)) == []


def test_validate_reports_every_problem():
    inst = Instance(n=2, weights=(-1, 2), costs=(1.0, -3.0), capacity_q=0.0, delta=0)
    problems = validate_instance(inst)
    assert len(problems) >= 4  # negative weight, negative cost, bad q, bad delta


# ---------------------------------------------------------------- pair enumeration

def test_pairs_seven_two():
    pairs = compactness_pairs(7, 2)
    assert len(pairs) == 10
    assert PairCoefficient(1, 7, 2) in pairs
    assert pairs == sorted(pairs)


def test_pairs_empty_when_delta_large():
    assert compactness_pairs(3, 4) == []


def test_pairs_rejects_bad_arguments():
    with pytest.raises(ValueError):
        compactness_pairs(0, 1)
    with pytest.raises(ValueError):
        compactness_pairs(5, 0)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 40), delta=st.integers(1, 8))
def test_pairs_cover_exactly_the_far_pairs(n, delta):
    pairs = compactness_pairs(n, delta)
    seen = {(p.i, p.j) for p in pairs}
    for p in pairs:
        assert p.kappa == (p.j - p.i - 1) // delta >= 1
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            assert ((i, j) in seen) == (j - i > delta)


# ---------------------------------------------------------------- selection checking

def test_check_selection_non_compact():
    rep = check_selection(toy(), {1, 4, 5, 7})
    assert rep.knapsack_ok
    assert not rep.compactness_ok
    assert (1, 4, 1) in rep.violated_pairs


def test_check_selection_compact():
    rep = check_selection(toy(), {1, 2, 4, 5, 7})
    assert rep.feasible


def test_check_selection_empty():
    rep = check_selection(toy(), set())
    assert not rep.knapsack_ok
    assert rep.compactness_ok


def test_check_selection_rejects_out_of_range():
    with pytest.raises(ValueError):
        check_selection(toy(), {0, 3})


def test_check_selection_matches_direct_inequalities():
    # every subset of random instances, cross-checked against a literal
    # evaluation of each far-pair inequality
    rng = np.random.default_rng(7)
    for _ in range(12):
        n = int(rng.integers(4, 13))
        inst = Instance(
            n=n,
            weights=tuple(int(w) for w in rng.integers(0, 9, n)),
            costs=tuple(float(c) for c in rng.uniform(0, 5, n)),
            capacity_q=float(rng.uniform(1, max(2, sum(rng.integers(0, 9, n))))),
            delta=int(rng.integers(1, 5)),
        )
        for mask in range(1 << n):
            sel = {k + 1 for k in range(n) if (mask >> k) & 1}
            rep = check_selection(inst, sel)
            ok = sum(inst.weights[k - 1] for k in sel) >= inst.capacity_q
            assert rep.knapsack_ok == ok
            compact = True
            for i in range(1, n + 1):
                for j in range(i + 1, n + 1):
                    if j - i > inst.delta and i in sel and j in sel:
                        kappa = (j - i - 1) // inst.delta
                        if len(sel & set(range(i + 1, j))) < kappa:
                            compact = False
            assert rep.compactness_ok == compact


# ---------------------------------------------------------------- complement map

def test_complement_capacity_arithmetic():
    mk = complement_instance(build_ce(2))
    assert mk.capacity == 12 - 10


def test_complement_applied_twice_restores_capacity():
    inst = build_ce(3)
    assert complement_instance(complement_instance(inst)).capacity == inst.capacity_q


def test_complement_endpoints():
    inst = build_ce(2)
    mk = complement_instance(inst)
    # full selection maps to the empty complement selection
    assert sum(inst.weights) >= inst.capacity_q
    assert 0 <= mk.capacity


def test_complement_objectives_by_enumeration():
    rng = np.random.default_rng(3)
    n = 10
    weights = tuple(int(w) for w in rng.integers(0, 8, n))
    costs = tuple(float(c) for c in rng.integers(1, 9, n))
    q = float(rng.integers(1, max(2, sum(weights))))
    inst = Instance(n=n, weights=weights, costs=costs, capacity_q=q, delta=n)
    mk = complement_instance(inst)

    best_min, best_max = np.inf, -np.inf
    for mask in range(1 << n):
        x = [(mask >> k) & 1 for k in range(n)]
        w_tot = sum(wi * xi for wi, xi in zip(weights, x))
        c_tot = sum(ci * xi for ci, xi in zip(costs, x))
        if w_tot >= q:
            best_min = min(best_min, c_tot)
        if w_tot <= mk.capacity:
            best_max = max(best_max, c_tot)
    assert best_min == sum(costs) - best_max


# ---------------------------------------------------------------- serialization

def test_json_round_trip_bit_for_bit():
    inst = build_ce(4)
    assert instance_from_json(instance_to_json(inst)) == inst


def test_json_preserves_unknown_meta():
    inst = Instance(n=2, weights=(3, 3), costs=(0.5, 0.25), capacity_q=4.0,
                    delta=1, meta={"seed": 9, "custom-tag": [1, 2, {"z": None}]})
    back = instance_from_json(instance_to_json(inst))
    assert back == inst
    assert back.meta["custom-tag"] == [1, 2, {"z": None}]


def test_json_field_order_irrelevant():
    doc = {"delta": 2, "q": 10.0, "costs": [1.0] * 4, "weights": [5, 1, 1, 5], "n": 4}
    inst = instance_from_json(json.dumps(doc))
    assert inst == build_ce(2).__class__(n=4, weights=(5, 1, 1, 5), costs=(1.0,) * 4,
                                         capacity_q=10.0, delta=2)


def test_json_rejects_missing_fields():
    with pytest.raises(ValueError):
        instance_from_json(json.dumps({"n": 1, "weights": [1]}))
