"""Semidefinite relaxations of the compact min-knapsack over a lifted matrix.

The binary vector x is lifted to X = xx' and the rank-one requirement is
replaced by positive semidefiniteness of the bordered matrix

    Y = [[1, diag(X)'], [diag(X), X]].

Four models are built here:

* naive relaxation: knapsack on diag(X), one quadratic compactness row
  ``kappa * X_ij <= sum_{i<k<j} X_kk`` per far-apart pair, Y PSD;
* penalized relaxation: the compactness rows move into the objective with
  weight lam, rewarding filled-in gaps and penalizing sparse ones, so that a
  single hyperparameter trades compactness against cost;
* the "+" variants of either, adding the strengthening tiers T1..T4 that
  reinforce the product structure the relaxation dropped.

Tiers (per item pair i < j, per triple with distinguished k, per column j,
and one global row):

* T1: X_ij >= 0, X_ii >= X_ij, X_jj >= X_ij, X_ij >= X_ii + X_jj - 1;
* T2: X_kk + X_ij >= X_ik + X_jk and
      X_ik + X_jk + X_ij >= X_ii + X_jj + X_kk - 1;
* T3: sum_i w_i X_ij >= q X_jj and
      q (X_jj - 1) + sum_i w_i X_ii >= sum_i w_i X_ij;
* T4: (sum_i w_i^2) (sum_ij X_ij) >= sum_i w_i^2 X_ii
      + 2 sum_{i<j} w_i w_j X_ij.

T2 over all triples is O(n^3) rows; by default only triples with i < k < j
and j - i <= 3*delta are added (they target the compactness structure), with
``triple_window="full"`` as opt-in.

In the underlying lifted matrix, item i occupies row/column i (1-based) of Y
and the corner Y[0, 0] = 1 carries the border.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .conic import (
    EQ,
    GE,
    LE,
    ConicError,
    ConicOptions,
    ConicProgram,
    matrix_from_svec,
    solve_program,
)
from .core import Instance, SolutionVector, compactness_pairs
from .lp import SolveReport

__all__ = [
    "LiftedSolution",
    "PenaltyWeight",
    "IntegralityReport",
    "build_naive",
    "build_penalized",
    "add_strengthening",
    "solve_conic",
    "verify_lifted_integrality",
    "rank_one_lift",
    "road_lift",
    "ALL_TIERS",
]

ALL_TIERS = ("T1", "T2", "T3", "T4")

#: Interior-point target tolerance is 1e-7; comparisons between solved bounds
#: should use 1e-5 to absorb the residual inexactness.
BOUND_TOL = 1e-5


@dataclass(frozen=True)
class PenaltyWeight:
    """Nonnegative weight of the compactness penalty in the objective."""

    lam: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"penalty weight must be finite and >= 0, got {self.lam}")


@dataclass(frozen=True)
class LiftedSolution:
    """A lifted point: X, its diagonal as a solution vector, and the bordered Y.

    Y is rebuilt from X so that the corner is exactly 1 and the border equals
    diag(X) identically; positive semidefiniteness then holds within the
    backend tolerance of the solve that produced X.
    """

    X: np.ndarray
    diag_x: SolutionVector
    Y: np.ndarray

    @classmethod
    def from_matrix(cls, X: np.ndarray, objective: float, source: str) -> "LiftedSolution":
        X = np.asarray(X, dtype=float)
        n = X.shape[0]
        d = np.diag(X)
        Y = np.empty((n + 1, n + 1))
        Y[0, 0] = 1.0
        Y[0, 1:] = d
        Y[1:, 0] = d
        Y[1:, 1:] = X
        vec = SolutionVector(x=tuple(float(v) for v in d), objective=objective, source=source)
        return cls(X=X, diag_x=vec, Y=Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class IntegralityReport:
    is_binary: bool
    rank_y_one: bool
    max_binary_gap: float
    second_eigenvalue_ratio: float


def rank_one_lift(x) -> np.ndarray:
    """X = xx', the exact lift of a binary vector."""
    v = np.asarray(x, dtype=float)
    return np.outer(v, v)


def road_lift(x) -> np.ndarray:
    """X = xx' + Diag(x - x^2), the diagonal-adjusted rank-one lift.

    For x in [0, 1]^n the bordered matrix of this X is always PSD (its Schur
    complement is the nonnegative diagonal x - x^2), so feasibility for the
    naive relaxation reduces to the linear rows.
    """
    v = np.asarray(x, dtype=float)
    return np.outer(v, v) + np.diag(v - v * v)


def _base_program(inst: Instance, kind: str) -> ConicProgram:
    n = inst.n
    prog = ConicProgram(order=n + 1, meta={"model": kind, "n": n})
    prog.add_row({(0, 0): 1.0}, EQ, 1.0)
    for i in range(1, n + 1):
        prog.add_row({(0, i): 1.0, (i, i): -1.0}, EQ, 0.0)  # border = diagonal
    prog.add_row({(i, i): float(inst.weights[i - 1]) for i in range(1, n + 1)},
                 GE, float(inst.capacity_q))
    prog.add_objective({(i, i): float(inst.costs[i - 1]) for i in range(1, n + 1)})
    return prog


def build_naive(inst: Instance) -> ConicProgram:
    """Lifted model with the rank-one constraint dropped and compactness as rows."""
    prog = _base_program(inst, "naive")
    for i, j, kappa in compactness_pairs(inst.n, inst.delta):
        entries = {(i, j): float(kappa)}
        for k in range(i + 1, j):
            entries[(k, k)] = entries.get((k, k), 0.0) - 1.0
        prog.add_row(entries, LE, 0.0)
    return prog


def build_penalized(inst: Instance, lam: PenaltyWeight | float) -> ConicProgram:
    """Lifted model with compactness scored in the objective instead of rows.

    The objective gains ``lam * (kappa * X_ij - sum_{i<k<j} X_kk)`` for every
    far-apart pair: unfilled gaps between selected items are charged, filled
    ones are rewarded.  A plain hinge penalty would be satisfied by any
    diagonal-adjusted lift of a box point and would never bind; this signed
    form is what makes the hyperparameter effective.
    """
    weight = lam if isinstance(lam, PenaltyWeight) else PenaltyWeight(float(lam))
    prog = _base_program(inst, "penalized")
    prog.meta["lam"] = weight.lam
    penalty: dict[tuple[int, int], float] = {}
    for i, j, kappa in compactness_pairs(inst.n, inst.delta):
        penalty[(i, j)] = penalty.get((i, j), 0.0) + weight.lam * kappa
        for k in range(i + 1, j):
            penalty[(k, k)] = penalty.get((k, k), 0.0) - weight.lam
    if penalty:
        prog.add_objective(penalty)
    return prog


def _triples(n: int, delta: int, window: int | str | None):
    if window == "full":
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                for k in range(1, n + 1):
                    if k != i and k != j:
                        yield i, j, k
        return
    cap = 3 * delta if window is None else int(window)
    for i in range(1, n + 1):
        for j in range(i + 1, min(i + cap, n) + 1):
            for k in range(i + 1, j):
                yield i, j, k


def add_strengthening(
    prog: ConicProgram,
    inst: Instance,
    tiers=ALL_TIERS,
    triple_window: int | str | None = None,
) -> ConicProgram:
    """Return a copy of the program with the requested valid-inequality tiers added.

    ``triple_window`` caps j - i for the T2 triples (default 3*delta) or takes
    the string "full" for every triple.
    """
    unknown = set(tiers) - set(ALL_TIERS)
    if unknown:
        raise ConicError(f"unknown strengthening tiers: {sorted(unknown)}")
    n = inst.n
    w = [float(v) for v in inst.weights]
    q = float(inst.capacity_q)
    out = prog.copy()
    out.meta["tiers"] = tuple(t for t in ALL_TIERS if t in tiers)
    out.meta["triple_window"] = "full" if triple_window == "full" else (
        3 * inst.delta if triple_window is None else int(triple_window))

    if "T1" in tiers:
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                out.add_row({(i, j): -1.0}, LE, 0.0)
                out.add_row({(i, j): 1.0, (i, i): -1.0}, LE, 0.0)
                out.add_row({(i, j): 1.0, (j, j): -1.0}, LE, 0.0)
                out.add_row({(i, i): 1.0, (j, j): 1.0, (i, j): -1.0}, LE, 1.0)
    if "T2" in tiers:
        for i, j, k in _triples(n, inst.delta, triple_window):
            out.add_row({(i, k): 1.0, (j, k): 1.0, (k, k): -1.0, (i, j): -1.0}, LE, 0.0)
            out.add_row(
                {(i, i): 1.0, (j, j): 1.0, (k, k): 1.0,
                 (i, k): -1.0, (j, k): -1.0, (i, j): -1.0},
                LE, 1.0)
    if "T3" in tiers:
        for j in range(1, n + 1):
            col = {(j, j): q}
            for i in range(1, n + 1):
                col[(i, j)] = col.get((i, j), 0.0) - w[i - 1]
            out.add_row(col, LE, 0.0)  # sum_i w_i X_ij >= q X_jj
            rev = {(j, j): -q}
            for i in range(1, n + 1):
                rev[(i, j)] = rev.get((i, j), 0.0) + w[i - 1]
                rev[(i, i)] = rev.get((i, i), 0.0) - w[i - 1]
            out.add_row(rev, LE, q)  # q (X_jj - 1) + sum_i w_i X_ii >= sum_i w_i X_ij
    if "T4" in tiers:
        sw2 = sum(v * v for v in w)
        entries: dict[tuple[int, int], float] = {}
        for i in range(1, n + 1):
            entries[(i, i)] = w[i - 1] ** 2 - sw2
            for j in range(i + 1, n + 1):
                entries[(i, j)] = 2.0 * w[i - 1] * w[j - 1] - 2.0 * sw2
        out.add_row(entries, LE, 0.0)
    return out


def solve_conic(prog: ConicProgram, opts: ConicOptions = ConicOptions()) -> tuple[LiftedSolution | None, SolveReport]:
    """Solve a lifted model and extract the solution matrix.

    Any backend meeting the residual/gap contract of :mod:`compactknap.conic`
    is admissible.  The report's ``bound`` is the dual objective, a certified
    lower bound on the model optimum.
    """
    start = time.perf_counter()
    res = solve_program(prog, opts)
    wall = time.perf_counter() - start
    lifted = None
    if res.svec_y is not None and res.status in ("Optimal", "TimeLimit", "IterationLimit"):
        Y = matrix_from_svec(res.svec_y, prog.order)
        source = prog.meta.get("model", "conic")
        lifted = LiftedSolution.from_matrix(Y[1:, 1:], float(res.primal_objective), source)
    report = SolveReport(
        status=res.status,
        objective=res.primal_objective,
        solution=lifted.diag_x if lifted is not None else None,
        bound=res.dual_objective,
        iterations=res.iterations,
        wall_time=wall,
        detail=res.detail,
    )
    return lifted, report


def verify_lifted_integrality(sol: LiftedSolution, tol: float = 1e-6) -> IntegralityReport:
    """Check whether a lifted point certifies an exact binary optimum.

    ``is_binary`` holds when every entry of X is within ``tol`` of {0, 1};
    ``rank_y_one`` holds when the second-largest eigenvalue of Y is at most
    ``tol`` times the largest.  The two are reported independently: a
    rank-one X with fractional entries (such as the constant 1/2 matrix) is
    not binary, so neither property implies the other.  Both together mean
    diag(X) is an exact optimum of the binary problem.  The all-zero matrix
    is accepted and reports (True, True); upstream feasibility screens it
    out whenever the capacity is positive.
    """
    eigs = np.linalg.eigvalsh(sol.Y)
    if eigs[0] < -tol:
        raise ConicError(f"matrix is not PSD within tolerance: min eigenvalue {eigs[0]:.3e}")
    gap = float(np.abs(sol.X - np.round(np.clip(sol.X, 0.0, 1.0))).max())
    ratio = float(eigs[-2] / eigs[-1]) if eigs[-1] > 0 else 0.0
    return IntegralityReport(
        is_binary=gap <= tol,
        rank_y_one=ratio <= tol,
        max_binary_gap=gap,
        second_eigenvalue_ratio=ratio,
    )
