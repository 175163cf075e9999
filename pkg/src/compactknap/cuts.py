"""Insufficient-subset cutting planes and their separation machinery.

A subset S of items is *insufficient* when its total weight stays strictly
below the capacity, and *maximal* when adding any single outside item pushes
it to the capacity.  Every maximal insufficient subset S yields the valid
inequality ``sum_{i not in S} x_i >= 1`` (at least one item outside S must be
selected), which transfers verbatim to the lifted models as
``sum_{i not in S} X_ii >= 1``.

Separating a fractional diagonal X* amounts to one pseudo-polynomial
knapsack: minimize the diagonal mass left outside S over insufficient S.
With integer weights, "weight strictly below q" is exactly "weight <= b"
for the integer budget b = ceil(q) - 1, so no epsilon parameter exists.
The procedure is: a greedy fractional-knapsack pre-check with the relaxed
budget q (sound, cheap), then the exact DP, then a greedy pass that grows the
DP set to maximality before emitting the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conic import GE
from .core import Instance, Selection
from .lp import Row

__all__ = [
    "MiscCut",
    "SeparationProblem",
    "DpOutcome",
    "SeparationOutcome",
    "CutError",
    "make_misc_cut",
    "separation_lp_check",
    "separation_dp",
    "greedy_maximalize",
    "separation_procedure",
    "conic_cut_row",
    "lp_cut_row",
]

#: A cut is only emitted when the separation optimum sits below 1 by at least
#: this guard band, so every emitted cut is violated by >= 1e-9.
CUT_MARGIN = 1e-9


class CutError(ValueError):
    """A subset that fails the insufficiency or maximality invariant."""


@dataclass(frozen=True)
class MiscCut:
    """A maximal insufficient subset and the support of its induced inequality."""

    subset_s: Selection
    outside: tuple[int, ...]  # sorted complement: sum of X_ii over these is >= 1


def make_misc_cut(inst: Instance, subset: Selection) -> MiscCut:
    """Build a cut from a subset, enforcing both invariants."""
    inside = frozenset(subset)
    bad = [k for k in inside if not (1 <= k <= inst.n)]
    if bad:
        raise CutError(f"subset indices out of range: {sorted(bad)}")
    weight = sum(inst.weights[k - 1] for k in inside)
    if not weight < inst.capacity_q:
        raise CutError(f"subset weight {weight} reaches capacity {inst.capacity_q}: not insufficient")
    outside = tuple(k for k in range(1, inst.n + 1) if k not in inside)
    light = [k for k in outside if weight + inst.weights[k - 1] < inst.capacity_q]
    if light:
        raise CutError(f"subset is not maximal: items {light} do not complete it")
    return MiscCut(subset_s=inside, outside=outside)


@dataclass(frozen=True)
class SeparationProblem:
    """Fractional diagonal, integer weights and the integer insufficiency budget."""

    diag_values: tuple[float, ...]
    int_weights: tuple[int, ...]
    budget_b: int
    capacity_q: float

    @classmethod
    def from_diag(cls, inst: Instance, diag) -> "SeparationProblem":
        x = np.asarray(diag, dtype=float)
        if x.shape != (inst.n,):
            raise ValueError(f"diagonal has shape {x.shape}, expected ({inst.n},)")
        if x.min() < -1e-6 or x.max() > 1 + 1e-6:
            raise ValueError("diagonal entries leave [0, 1] by more than 1e-6")
        x = np.clip(x, 0.0, 1.0)
        return cls(
            diag_values=tuple(float(v) for v in x),
            int_weights=inst.weights,
            budget_b=math.ceil(inst.capacity_q) - 1,
            capacity_q=float(inst.capacity_q),
        )


@dataclass(frozen=True)
class DpOutcome:
    opt_value: float
    alpha_set: Selection


@dataclass(frozen=True)
class SeparationOutcome:
    cut: MiscCut | None
    lp_value: float
    dp_value: float | None
    outside_mass: float | None = None  # diagonal mass on the cut support, if a cut was found


def separation_lp_check(sp: SeparationProblem) -> float:
    """Continuous lower bound on the separation optimum, by the greedy ratio rule.

    The box relaxation with the relaxed budget q is a continuous knapsack:
    cover items by decreasing mass/weight ratio, with one fractional item.
    Relaxing the budget from b to q only lowers the value, so a result >= 1
    soundly certifies that no separating cut exists.
    """
    x = np.asarray(sp.diag_values)
    w = np.asarray(sp.int_weights, dtype=float)
    total = float(np.sum(x))
    covered = float(np.sum(x[w == 0.0]))
    remaining = sp.capacity_q
    heavy = np.where(w > 0.0)[0]
    order = sorted(heavy, key=lambda i: (-(x[i] / w[i]), i))
    for i in order:
        if w[i] <= remaining:
            covered += float(x[i])
            remaining -= float(w[i])
        else:
            covered += float(x[i]) * remaining / float(w[i])
            break
    return total - covered


def separation_dp(sp: SeparationProblem) -> DpOutcome:
    """Exact separation optimum by dynamic programming over the weight budget.

    Maximizes the covered diagonal mass over subsets of weight at most
    ``budget_b``; returns the uncovered mass and one maximizing subset.
    A negative budget admits no subset: the uncovered mass is the full
    diagonal sum and the set is empty.
    """
    x = np.asarray(sp.diag_values)
    total = float(np.sum(x))
    if sp.budget_b < 0:
        return DpOutcome(opt_value=total, alpha_set=frozenset())
    n = len(x)
    b = sp.budget_b
    dp = np.zeros(b + 1)
    keep = np.zeros((n, b + 1), dtype=bool)
    for i in range(n):
        wi = sp.int_weights[i]
        vi = float(x[i])
        if wi == 0:
            if vi > 0.0:
                dp = dp + vi
                keep[i, :] = True
            continue
        if wi > b:
            continue
        cand = np.concatenate([np.full(wi, -np.inf), dp[:-wi] + vi])
        better = cand > dp
        keep[i] = better
        dp = np.where(better, cand, dp)
    chosen = []
    cap = b
    for i in reversed(range(n)):
        if keep[i, cap]:
            chosen.append(i + 1)
            cap -= sp.int_weights[i]
    return DpOutcome(opt_value=total - float(dp[b]), alpha_set=frozenset(chosen))


def greedy_maximalize(inst: Instance, s: Selection) -> Selection:
    """Grow an insufficient subset to maximality.

    Adds the lightest outside item (lowest index on ties) until the subset
    stops being insufficient, then removes the last addition.  The result is
    insufficient, and every outside item completes it: the items never added
    are at least as heavy as the removed one.
    """
    inside = set(s)
    bad = [k for k in inside if not (1 <= k <= inst.n)]
    if bad:
        raise ValueError(f"selection indices out of range: {sorted(bad)}")
    weight = sum(inst.weights[k - 1] for k in inside)
    if not weight < inst.capacity_q:
        raise ValueError(f"input subset has weight {weight} >= q={inst.capacity_q}: not insufficient")
    if inst.total_weight < inst.capacity_q:
        raise ValueError("total weight below capacity: no maximal insufficient subset exists")
    pool = sorted((k for k in range(1, inst.n + 1) if k not in inside),
                  key=lambda k: (inst.weights[k - 1], k))
    for k in pool:
        inside.add(k)
        weight += inst.weights[k - 1]
        if weight >= inst.capacity_q:
            inside.remove(k)
            break
    return frozenset(inside)


def separation_procedure(inst: Instance, sol) -> SeparationOutcome:
    """Find a violated insufficient-subset cut for a lifted point, or certify none.

    ``sol`` is a lifted solution or anything exposing a diagonal in [0, 1]^n.
    The fractional pre-check runs first; if it already reaches 1 no cut can
    exist and the DP is skipped.  Otherwise the DP decides exactly, and a
    sub-unit optimum is corrected to a maximal subset whose cut is violated
    by the input diagonal (by at least the guard band).
    """
    diag = getattr(getattr(sol, "diag_x", sol), "x", sol)
    sp = SeparationProblem.from_diag(inst, diag)
    lp_value = separation_lp_check(sp)
    if lp_value >= 1.0:
        return SeparationOutcome(cut=None, lp_value=lp_value, dp_value=None)
    dp = separation_dp(sp)
    if dp.opt_value >= 1.0 - CUT_MARGIN:
        return SeparationOutcome(cut=None, lp_value=lp_value, dp_value=dp.opt_value)
    sbar = greedy_maximalize(inst, dp.alpha_set)
    cut = make_misc_cut(inst, sbar)
    outside_mass = float(sum(sp.diag_values[k - 1] for k in cut.outside))
    if not outside_mass < 1.0 - CUT_MARGIN:
        raise CutError(
            f"separation produced a non-violated cut: outside mass {outside_mass}")
    return SeparationOutcome(cut=cut, lp_value=lp_value, dp_value=dp.opt_value,
                             outside_mass=outside_mass)


def conic_cut_row(cut: MiscCut) -> tuple[dict[tuple[int, int], float], str, float]:
    """The cut as a lifted-model row over the diagonal of X."""
    return ({(k, k): 1.0 for k in cut.outside}, GE, 1.0)


def lp_cut_row(cut: MiscCut) -> Row:
    """The cut as a row over the binary variables (0-based)."""
    return Row({k - 1: 1.0 for k in cut.outside}, GE, 1.0)
