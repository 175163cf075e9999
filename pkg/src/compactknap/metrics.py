"""Solution-quality metrics and structural checkers.

Three normalized scores compare solutions across models and instance sizes,
all lying in [0, 1]:

* ``imp`` (imprecision): the cost of the solution relative to selecting
  everything, c'x / c'1;
* ``comp`` (compactness): the largest hole between consecutive selected
  items, (1/n) * max (j - i - 1);
* ``frac`` (fractionality): the normalized distance to the nearest binary
  vector, 2/sqrt(n) * ||x - floor(x + 1/2)||_2, which equals 1 exactly at
  the all-halves vector and 0 exactly at binary vectors.

Items are considered selected when their value reaches 1/2 (ties select).

``road_check`` tests whether the diagonal-adjusted rank-one lift of a vector
(usually an LP optimum) is feasible for the naive semidefinite relaxation:
the knapsack row, the quadratic compactness rows ``kappa * x_i * x_j <=
sum_{i<k<j} x_k``, and box membership.  Positive semidefiniteness of the
bordered lift holds analytically for any box vector (the Schur complement is
the diagonal x - x^2), so it is not rechecked numerically.  With rational
input the arithmetic is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .core import Instance, Selection, compactness_pairs
from .lp import SolveLimits, SolveReport, build_mkpc, solve_lp, solve_mip
from .sdp import build_naive, solve_conic
from .conic import ConicOptions

__all__ = [
    "MetricReport",
    "RoadReport",
    "BoundOrderReport",
    "round_solution",
    "imp",
    "comp",
    "frac",
    "gap",
    "road_check",
    "bound_order_check",
    "metric_report",
]


@dataclass(frozen=True)
class MetricReport:
    imp: float
    comp: float
    frac: float
    gap_percent: float | None
    rounded: Selection


@dataclass(frozen=True)
class RoadReport:
    holds: bool
    box_ok: bool
    knapsack_ok: bool
    violations: tuple[tuple[int, int, object, object], ...]  # (i, j, lhs, rhs)


@dataclass(frozen=True)
class BoundOrderReport:
    sdp_lb: float
    lp_lb: float
    mip_obj: float
    ordering_holds: bool


def _values(x) -> np.ndarray:
    v = np.asarray(getattr(x, "x", x), dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    return v


def round_solution(x) -> Selection:
    """Items with value at least 1/2, as 1-based indices."""
    v = _values(x)
    return frozenset(int(i) + 1 for i in np.where(v >= 0.5)[0])


def imp(x, inst: Instance) -> float:
    v = _values(x)
    denom = float(sum(inst.costs))
    if denom == 0.0:
        raise ValueError("all costs are zero: imprecision is undefined")
    return float(np.dot(inst.costs, v)) / denom


def comp(sel: Selection, n: int) -> float:
    """Largest gap between consecutive selected items, normalized by n.

    Selections with at most one item have no spread and score 0.
    """
    items = sorted(sel)
    if any(not 1 <= k <= n for k in items):
        raise ValueError(f"selection outside [1..{n}]")
    if len(items) <= 1:
        return 0.0
    return max(b - a - 1 for a, b in zip(items, items[1:])) / n


def frac(x) -> float:
    v = _values(x)
    d = v - np.floor(v + 0.5)
    return 2.0 * math.sqrt(float(np.dot(d, d)) / len(v))


def gap(ub: float, lb: float) -> float:
    """Relative gap in percent, 100 * (ub - lb) / ub."""
    if not ub > 0:
        raise ValueError(f"gap needs ub > 0, got {ub}")
    return 100.0 * (ub - lb) / ub


def _is_rational_vector(x) -> bool:
    vals = getattr(x, "x", x)
    try:
        return all(isinstance(v, Rational) for v in vals)
    except TypeError:
        return False


def road_check(inst: Instance, x, tol: float = 1e-9) -> RoadReport:
    """Feasibility of the diagonal-adjusted rank-one lift for the naive relaxation.

    Exact rational arithmetic is used when every entry of ``x`` is rational
    (int or Fraction); otherwise comparisons carry the floating tolerance.
    Violated quadratic compactness rows are listed as (i, j, lhs, rhs).
    """
    vals = list(getattr(x, "x", x))
    if len(vals) != inst.n:
        raise ValueError(f"vector has length {len(vals)}, expected {inst.n}")
    exact = _is_rational_vector(vals)
    if exact:
        xs = [Fraction(v) for v in vals]
        w = [Fraction(v) for v in inst.weights]
        q = Fraction(inst.capacity_q)
        zero, one, slack = Fraction(0), Fraction(1), Fraction(0)
    else:
        xs = [float(v) for v in vals]
        w = [float(v) for v in inst.weights]
        q = float(inst.capacity_q)
        zero, one, slack = 0.0, 1.0, tol

    box_ok = all(zero - slack <= v <= one + slack for v in xs)
    knapsack_ok = sum(wi * xi for wi, xi in zip(w, xs)) >= q - slack
    violations = []
    for i, j, kappa in compactness_pairs(inst.n, inst.delta):
        lhs = kappa * xs[i - 1] * xs[j - 1]
        rhs = sum(xs[i:j - 1])
        if lhs > rhs + slack:
            violations.append((i, j, lhs, rhs))
    return RoadReport(
        holds=box_ok and knapsack_ok and not violations,
        box_ok=box_ok,
        knapsack_ok=knapsack_ok,
        violations=tuple(violations),
    )


def bound_order_check(
    inst: Instance,
    tol: float = 1e-5,
    mip_limits: SolveLimits = SolveLimits(),
    conic_opts: ConicOptions = ConicOptions(),
) -> BoundOrderReport:
    """Solve the naive relaxation, the LP and the exact model; compare bounds.

    The expected ordering sdp <= lp <= mip holds empirically but is not
    proven in general, so callers should treat a False result on generated
    instances as a report, not an error.
    """
    _, sdp_rep = solve_conic(build_naive(inst), conic_opts)
    program = build_mkpc(inst)
    lp_rep = solve_lp(program)
    mip_rep = solve_mip(program, mip_limits)
    for name, rep in (("sdp", sdp_rep), ("lp", lp_rep), ("mip", mip_rep)):
        if rep.objective is None:
            raise RuntimeError(f"{name} solve failed: {rep.status} {rep.detail}")
    sdp_lb, lp_lb, mip_obj = sdp_rep.objective, lp_rep.objective, mip_rep.objective
    holds = (sdp_lb <= lp_lb + tol) and (lp_lb <= mip_obj + tol)
    return BoundOrderReport(sdp_lb=sdp_lb, lp_lb=lp_lb, mip_obj=mip_obj,
                            ordering_holds=holds)


def metric_report(x, inst: Instance, ub: float | None = None,
                  lb: float | None = None) -> MetricReport:
    """All three scores plus the rounded selection, and the gap when bounds are given."""
    rounded = round_solution(x)
    return MetricReport(
        imp=imp(x, inst),
        comp=comp(rounded, inst.n),
        frac=frac(x),
        gap_percent=gap(ub, lb) if ub is not None and lb is not None else None,
        rounded=rounded,
    )
