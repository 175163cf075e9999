"""Linear model of the compact min-knapsack, LP relaxation, exact solvers.

The binary model has one knapsack row ``w'x >= q`` and one row per far-apart
pair (i, j): ``kappa*x_i + kappa*x_j - sum_{i<k<j} x_k <= kappa``.  The LP
relaxation replaces x in {0,1}^n by the box [0,1]^n.

``solve_lp`` delegates to the HiGHS bounded-variable simplex via
scipy.optimize.linprog: variable bounds are handled by the pivoting rules
rather than by 2n extra rows, which matters because the model is already
dense in compactness rows.  ``solve_mip`` is a best-first branch & bound on
top of ``solve_lp`` that branches on the variable closest to 1/2; these
instances relax to many near-half values, so this is also the rule that
exposes their difficulty.  ``enumerate_exact`` is the independent oracle: it
evaluates every one of the 2^n selections against the constraint system.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.optimize import linprog

from .core import Instance, SolutionVector, compactness_pairs

__all__ = [
    "Row",
    "LinearProgram",
    "SolveReport",
    "SolveLimits",
    "SolverError",
    "build_mkpc",
    "solve_lp",
    "solve_mip",
    "enumerate_exact",
    "OPTIMAL",
    "INFEASIBLE",
    "ITERATION_LIMIT",
    "TIME_LIMIT",
    "SOLVER_FAILURE",
]

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
ITERATION_LIMIT = "IterationLimit"
TIME_LIMIT = "TimeLimit"
SOLVER_FAILURE = "SolverFailure"

LE, GE, EQ = "<=", ">=", "=="

#: Objectives are compared with absolute tolerance 1e-6, constraint residuals
#: with 1e-8, and integrality with 1e-6.
OBJ_TOL = 1e-6
RESIDUAL_TOL = 1e-8
INT_TOL = 1e-6


class SolverError(RuntimeError):
    """Numerical breakdown or an unexpected backend status."""


class Row(NamedTuple):
    """One linear row: a sparse coefficient map over 0-based variables."""

    coeffs: dict[int, float]
    sense: str
    rhs: float


@dataclass
class LinearProgram:
    """min objective'x subject to rows, lo <= x <= hi."""

    objective: np.ndarray
    rows: list[Row]
    bounds: np.ndarray  # shape (n, 2)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def with_rows(self, extra: Iterable[Row]) -> "LinearProgram":
        return LinearProgram(
            objective=self.objective.copy(),
            rows=[*self.rows, *extra],
            bounds=self.bounds.copy(),
        )


@dataclass(frozen=True)
class SolveLimits:
    time_limit: float | None = None
    node_limit: int | None = None


@dataclass(frozen=True)
class SolveReport:
    status: str
    objective: float | None
    solution: SolutionVector | None
    bound: float | None = None  # certified lower bound (equals objective when Optimal)
    node_count: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    detail: str = ""


def build_mkpc(inst: Instance) -> LinearProgram:
    """Assemble the knapsack row plus one compactness row per far-apart pair."""
    n = inst.n
    rows = [Row({k: float(w) for k, w in enumerate(inst.weights)}, GE, float(inst.capacity_q))]
    for i, j, kappa in compactness_pairs(n, inst.delta):
        coeffs = {i - 1: float(kappa), j - 1: float(kappa)}
        for k in range(i, j - 1):  # 0-based indices of items strictly between
            coeffs[k] = coeffs.get(k, 0.0) - 1.0
        rows.append(Row(coeffs, LE, float(kappa)))
    return LinearProgram(
        objective=np.asarray(inst.costs, dtype=float),
        rows=rows,
        bounds=np.tile([0.0, 1.0], (n, 1)),
    )


def _dense_form(lp: LinearProgram):
    n = lp.num_vars
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for coeffs, sense, rhs in lp.rows:
        vec = np.zeros(n)
        for k, v in coeffs.items():
            vec[k] = v
        if sense == LE:
            ub_rows.append(vec)
            ub_rhs.append(rhs)
        elif sense == GE:
            ub_rows.append(-vec)
            ub_rhs.append(-rhs)
        elif sense == EQ:
            eq_rows.append(vec)
            eq_rhs.append(rhs)
        else:
            raise ValueError(f"unknown row sense {sense!r}")
    A_ub = np.array(ub_rows) if ub_rows else None
    A_eq = np.array(eq_rows) if eq_rows else None
    return (
        A_ub,
        np.array(ub_rhs) if ub_rows else None,
        A_eq,
        np.array(eq_rhs) if eq_rows else None,
    )


def _run_highs(lp, dense, bounds, time_limit):
    A_ub, b_ub, A_eq, b_eq = dense
    options = {
        "presolve": True,
        "primal_feasibility_tolerance": 1e-9,
        "dual_feasibility_tolerance": 1e-9,
    }
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    return linprog(
        lp.objective,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options=options,
    )


def solve_lp(lp: LinearProgram, time_limit: float | None = None) -> SolveReport:
    """Solve the LP relaxation to an optimal vertex.

    The returned point satisfies every row within 1e-8 and the objective is
    exact to 1e-6 relative.
    """
    start = time.perf_counter()
    res = _run_highs(lp, _dense_form(lp), lp.bounds, time_limit)
    wall = time.perf_counter() - start
    if res.status == 0:
        x = np.clip(res.x, lp.bounds[:, 0], lp.bounds[:, 1])
        obj = float(lp.objective @ x)
        sol = SolutionVector(x=tuple(float(v) for v in x), objective=obj, source="lp")
        return SolveReport(OPTIMAL, obj, sol, bound=obj, wall_time=wall,
                           iterations=int(getattr(res, "nit", 0) or 0))
    if res.status == 2:
        return SolveReport(INFEASIBLE, None, None, wall_time=wall)
    if res.status == 1:
        status = TIME_LIMIT if time_limit is not None and "time" in res.message.lower() else ITERATION_LIMIT
        return SolveReport(status, None, None, wall_time=wall, detail=res.message)
    raise SolverError(f"LP backend failed: status={res.status} message={res.message!r}")


def _branch_var(x: np.ndarray) -> int | None:
    """Fractional variable closest to 1/2, lowest index on ties; None if integral."""
    frac = np.abs(x - np.round(x))
    candidates = np.where(frac > INT_TOL)[0]
    if candidates.size == 0:
        return None
    return int(candidates[np.argmin(np.abs(x[candidates] - 0.5))])


def _row_residual(lp: LinearProgram, x: np.ndarray) -> float:
    worst = 0.0
    for coeffs, sense, rhs in lp.rows:
        val = sum(v * x[k] for k, v in coeffs.items())
        if sense == LE:
            worst = max(worst, val - rhs)
        elif sense == GE:
            worst = max(worst, rhs - val)
        else:
            worst = max(worst, abs(val - rhs))
    return worst


def solve_mip(lp: LinearProgram, limits: SolveLimits = SolveLimits()) -> SolveReport:
    """Exact binary optimum by best-first branch & bound over LP relaxations.

    Nodes are ordered by relaxation bound; branching fixes the fractional
    variable closest to 1/2 (lowest index on ties) to 0 and 1.  A node is
    pruned when its bound is within 1e-9 of the incumbent.  On time or node
    limit the best incumbent is returned together with a still-valid lower
    bound.
    """
    start = time.perf_counter()
    dense = _dense_form(lp)

    def relax(bounds: np.ndarray):
        budget = None
        if limits.time_limit is not None:
            budget = max(limits.time_limit - (time.perf_counter() - start), 0.05)
        return _run_highs(lp, dense, bounds, budget)

    root = relax(lp.bounds)
    if root.status == 2:
        return SolveReport(INFEASIBLE, None, None,
                           wall_time=time.perf_counter() - start, node_count=1)
    if root.status != 0:
        raise SolverError(f"root relaxation failed: {root.message!r}")

    incumbent: np.ndarray | None = None
    incumbent_obj = np.inf
    nodes = 0
    tie = 0
    heap = [(float(root.fun), tie, root.x.copy(), lp.bounds.copy())]

    def out_of_budget() -> str | None:
        if limits.time_limit is not None and time.perf_counter() - start > limits.time_limit:
            return TIME_LIMIT
        if limits.node_limit is not None and nodes >= limits.node_limit:
            return ITERATION_LIMIT
        return None

    status = OPTIMAL
    lower = float(root.fun)
    while heap:
        bound, _, x, node_bounds = heapq.heappop(heap)
        lower = bound  # best-first: heap top is the global lower bound
        if bound >= incumbent_obj - 1e-9:
            lower = incumbent_obj
            break
        stop = out_of_budget()
        if stop is not None:
            status = stop
            break
        nodes += 1
        var = _branch_var(x)
        if var is None:
            xb = np.round(x)
            if _row_residual(lp, xb) <= 1e-7:
                obj = float(lp.objective @ xb)
                if obj < incumbent_obj:
                    incumbent_obj, incumbent = obj, xb
                continue
            # rounding broke feasibility: branch on the first still-free variable
            free = np.where(node_bounds[:, 0] < node_bounds[:, 1])[0]
            if free.size == 0:
                continue
            var = int(free[0])
        for val in (0.0, 1.0):
            child = node_bounds.copy()
            child[var] = (val, val)
            res = relax(child)
            if res.status != 0:
                continue  # infeasible child (or budget hit; parent bound stays valid)
            if res.fun < incumbent_obj - 1e-9:
                tie += 1
                heapq.heappush(heap, (float(res.fun), tie, res.x.copy(), child))
    else:
        lower = incumbent_obj if incumbent is not None else lower

    wall = time.perf_counter() - start
    if incumbent is None:
        if status != OPTIMAL:
            return SolveReport(status, None, None, bound=lower,
                               node_count=nodes, wall_time=wall)
        return SolveReport(INFEASIBLE, None, None, node_count=nodes, wall_time=wall)
    if status == OPTIMAL:
        lower = incumbent_obj
    sol = SolutionVector(x=tuple(float(v) for v in incumbent),
                         objective=incumbent_obj, source="mip")
    return SolveReport(status, incumbent_obj, sol, bound=min(lower, incumbent_obj),
                       node_count=nodes, wall_time=wall)


MAX_ENUM_N = 24
_CHUNK = 1 << 18


def enumerate_exact(inst: Instance) -> SolveReport:
    """Exact optimum by evaluating all 2^n selections against the constraints.

    This is the test oracle for the exact solvers; it shares no code with
    branch & bound.  Selections are scored in bitmask order, vectorized in
    chunks.
    """
    if inst.n > MAX_ENUM_N:
        raise ValueError(f"enumeration supports n <= {MAX_ENUM_N}, got n={inst.n}")
    start = time.perf_counter()
    n = inst.n
    w = np.asarray(inst.weights, dtype=np.int64)
    c = np.asarray(inst.costs, dtype=float)
    pairs = compactness_pairs(n, inst.delta)

    best_obj = np.inf
    best_mask = -1
    for lo in range(0, 1 << n, _CHUNK):
        masks = np.arange(lo, min(lo + _CHUNK, 1 << n), dtype=np.int64)
        bits = (masks[:, None] >> np.arange(n)) & 1
        feasible = (bits @ w) >= inst.capacity_q
        if pairs:
            prefix = np.cumsum(bits, axis=1)
            for i, j, kappa in pairs:
                both = (bits[:, i - 1] & bits[:, j - 1]).astype(bool)
                between = prefix[:, j - 2] - prefix[:, i - 1]
                feasible &= ~both | (between >= kappa)
        if not feasible.any():
            continue
        objs = bits @ c
        objs[~feasible] = np.inf
        k = int(np.argmin(objs))
        if objs[k] < best_obj:
            best_obj = float(objs[k])
            best_mask = int(masks[k])

    wall = time.perf_counter() - start
    if best_mask < 0:
        return SolveReport(INFEASIBLE, None, None, wall_time=wall)
    xvec = np.array([(best_mask >> k) & 1 for k in range(n)], dtype=float)
    best_obj = float(c @ xvec)  # recomputed on the final point, same path other solvers use
    sol = SolutionVector(x=tuple(xvec), objective=best_obj, source="enumerate")
    return SolveReport(OPTIMAL, best_obj, sol, bound=best_obj, wall_time=wall)
