import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compactknap.core import Instance
from compactknap.instgen import build_ce, generate_instance
from compactknap.metrics import (
    bound_order_check,
    comp,
    frac,
    gap,
    imp,
    metric_report,
    road_check,
    round_solution,
)

X5 = (1.0, 3 / 4, 119 / 180, 0.0, 17 / 135, 251 / 540, 0.0, 107 / 540, 11 / 15, 11 / 15)
X5_EXACT = (Fraction(1), Fraction(3, 4), Fraction(119, 180), Fraction(0),
            Fraction(17, 135), Fraction(251, 540), Fraction(0), Fraction(107, 540),
            Fraction(11, 15), Fraction(11, 15))


# ---------------------------------------------------------------- rounding

def test_round_published_vector():
    assert round_solution(X5) == {1, 2, 3, 9, 10}


def test_round_binary_support():
    assert round_solution((1.0, 0.0, 1.0)) == {1, 3}


def test_round_ties_select():
    assert round_solution((0.5, 0.5)) == {1, 2}


# ---------------------------------------------------------------- imprecision

def test_imp_published_vector():
    assert imp(X5, build_ce(5)) == pytest.approx(7 / 15, abs=1e-12)


def test_imp_extremes():
    inst = build_ce(3)
    assert imp((1.0,) * 6, inst) == pytest.approx(1.0)
    assert imp((0.0,) * 6, inst) == 0.0


def test_imp_rejects_zero_costs():
    inst = Instance(n=2, weights=(1, 1), costs=(0.0, 0.0), capacity_q=1.0, delta=1)
    with pytest.raises(ValueError):
        imp((1.0, 0.0), inst)


# ---------------------------------------------------------------- compactness

def test_comp_figure_selection():
    assert comp({1, 4, 5, 7}, 7) == pytest.approx(2 / 7)


def test_comp_full_selection():
    assert comp(set(range(1, 8)), 7) == 0.0


def test_comp_singleton_and_empty():
    assert comp({3}, 7) == 0.0
    assert comp(set(), 7) == 0.0


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_comp_never_increases_when_adding_items(data):
    n = data.draw(st.integers(2, 30))
    sel = data.draw(st.sets(st.integers(1, n), max_size=n))
    k = data.draw(st.integers(1, n))
    assert comp(sel | {k}, n) <= comp(sel, n) + 1e-15


# ---------------------------------------------------------------- fractionality

def test_frac_identities_exact():
    for n in (1, 2, 7, 10, 33):
        assert frac((0.5,) * n) == 1.0
    assert frac((0.0, 1.0, 1.0, 0.0)) == 0.0


def test_frac_binary_iff_zero():
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = rng.uniform(0, 1, 8)
        v = frac(x)
        is_binary = np.all((x == 0) | (x == 1))
        assert (v == 0.0) == is_binary


def test_frac_published_vector_matches_exact_rational_definition():
    # high-precision evaluation of the definition with exact rationals
    d2 = sum((x - round(x)) ** 2 for x in X5_EXACT)
    expected = 2 * math.sqrt(d2 / 10)
    assert frac(X5) == pytest.approx(expected, abs=1e-14)


# ---------------------------------------------------------------- gap

def test_gap_family_values():
    assert gap(6.0, 14.0 / 3.0) == pytest.approx(200.0 / 9.0, abs=1e-9)


def test_gap_degenerate():
    assert gap(5.0, 5.0) == 0.0
    assert gap(1.0, 0.0) == 100.0


def test_gap_rejects_nonpositive_ub():
    with pytest.raises(ValueError):
        gap(0.0, 0.0)


# ---------------------------------------------------------------- metric ranges

def test_metric_ranges_fuzz():
    rng = np.random.default_rng(4)
    for _ in range(2000):
        n = int(rng.integers(1, 40))
        x = rng.uniform(0, 1, n)
        inst = Instance(n=n, weights=(1,) * n,
                        costs=tuple(float(c) for c in rng.uniform(0.01, 5, n)),
                        capacity_q=1.0, delta=1)
        assert 0.0 <= imp(x, inst) <= 1.0
        assert 0.0 <= frac(x) <= 1.0
        assert 0.0 <= comp(round_solution(x), n) <= 1.0


# ---------------------------------------------------------------- quadratic lift checker

def test_road_family_violation_exact():
    rep = road_check(build_ce(5), X5_EXACT)
    assert not rep.holds
    assert rep.box_ok and rep.knapsack_ok
    assert (2, 9, Fraction(33, 20), Fraction(29, 20)) in rep.violations


def test_road_binary_feasible_holds():
    inst = build_ce(5)
    x = (1, 0, 1, 0, 1, 0, 1, 0, 1, 1)
    rep = road_check(inst, x)
    assert rep.holds


def test_road_zero_vector_reports_knapsack():
    rep = road_check(build_ce(2), (0, 0, 0, 0))
    assert not rep.holds
    assert not rep.knapsack_ok
    assert rep.violations == ()


def test_road_float_path_matches_exact_verdict():
    rep = road_check(build_ce(5), X5)
    assert not rep.holds
    assert any((i, j) == (2, 9) for i, j, _, _ in rep.violations)


# ---------------------------------------------------------------- bound ordering

def test_bound_order_family():
    rep = bound_order_check(build_ce(5))
    assert rep.ordering_holds
    assert abs(rep.lp_lb - 14 / 3) < 1e-6
    assert abs(rep.mip_obj - 6.0) < 1e-9
    assert rep.sdp_lb < rep.lp_lb - 0.1  # strictly better at m = 5


def test_bound_order_tight_instance():
    # binary LP optimum: all three models coincide
    inst = Instance(n=2, weights=(3, 2), costs=(1.0, 1.0), capacity_q=5.0, delta=1)
    rep = bound_order_check(inst)
    assert rep.ordering_holds
    assert rep.sdp_lb == pytest.approx(2.0, abs=1e-5)
    assert rep.lp_lb == pytest.approx(2.0, abs=1e-9)
    assert rep.mip_obj == 2.0


# ---------------------------------------------------------------- aggregate report

def test_metric_report_wires_gap():
    rep = metric_report(X5, build_ce(5), ub=6.0, lb=14 / 3)
    assert rep.gap_percent == pytest.approx(200 / 9, abs=1e-9)
    assert rep.rounded == {1, 2, 3, 9, 10}
    assert 0 <= rep.imp <= 1 and 0 <= rep.comp <= 1 and 0 <= rep.frac <= 1
