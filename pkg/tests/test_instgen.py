import hashlib

import pytest

from compactknap.core import instance_to_json, validate_instance
from compactknap.instgen import GenParams, build_ce, generate_instance


def digest(inst):
    return hashlib.sha256(instance_to_json(inst).encode()).hexdigest()


def test_same_seed_same_bytes():
    assert digest(generate_instance(50, 7)) == digest(generate_instance(50, 7))


def test_distinct_seeds_distinct_instances():
    seen = {digest(generate_instance(20, seed)) for seed in range(1000)}
    assert len(seen) == 1000


def test_histogram_mass_bounds():
    for seed in range(20):
        inst = generate_instance(30, seed)
        total = sum(inst.weights)
        assert 0 < total <= 10000


def test_draw_ranges():
    for seed in range(30):
        inst = generate_instance(40, seed)
        assert all(1.0 <= c <= 6.0 for c in inst.costs)
        assert 0.65 <= inst.capacity_q / sum(inst.weights) <= 0.95
        assert inst.delta in (1, 2, 3, 4)
        params = inst.meta["params"]
        assert params["k"] in (8, 16, 32)
        assert 1 <= params["peak1"] <= 40
        assert 1 <= params["peak2"] <= 40


def test_generated_instances_validate():
    for seed in range(25):
        assert validate_instance(generate_instance(25, seed)) == []


def test_small_n_rejected():
    with pytest.raises(ValueError):
        generate_instance(3, 0)


def test_meta_records_provenance():
    inst = generate_instance(24, 99)
    assert inst.meta["seed"] == 99
    assert inst.meta["scale"] == float(sum(inst.weights))
    assert "generator" in inst.meta


def test_genparams_validation():
    with pytest.raises(ValueError):
        GenParams(n=10, seed=0, k=7, p=0.7, delta=2, peak1=3, peak2=7)
    with pytest.raises(ValueError):
        GenParams(n=10, seed=0, k=8, p=0.5, delta=2, peak1=3, peak2=7)
    with pytest.raises(ValueError):
        GenParams(n=10, seed=0, k=8, p=0.7, delta=2, peak1=0.5, peak2=7)


def test_ce_family_m5():
    inst = build_ce(5)
    assert inst.n == 10
    assert inst.weights == (11, 1, 1, 1, 1, 1, 1, 1, 1, 11)
    assert inst.capacity_q == 22.0
    assert inst.delta == 2
    assert inst.costs == (1.0,) * 10


def test_ce_family_m2():
    inst = build_ce(2)
    assert inst.n == 4
    assert inst.weights == (5, 1, 1, 5)
    assert inst.capacity_q == 10.0


def test_ce_family_rejects_small_m():
    with pytest.raises(ValueError):
        build_ce(1)


@pytest.mark.parametrize("m", [2, 3, 5, 9, 20])
def test_ce_extremes_meet_capacity_exactly(m):
    inst = build_ce(m)
    assert inst.weights[0] + inst.weights[-1] == inst.capacity_q == 4 * m + 2
    assert validate_instance(inst) == []
