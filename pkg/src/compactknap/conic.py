"""Vectorized symmetric storage and the conic solver backend.

A conic model here is a linear objective and linear rows over a single
symmetric matrix variable Y of a given order, constrained to the positive
semidefinite cone.  Y is stored as its scaled upper triangle in column-major
order ("svec"): entry (i, j) with i <= j sits at position j*(j+1)/2 + i, and
off-diagonal entries are scaled by sqrt(2) so that the Euclidean inner
product of two svec vectors equals the Frobenius inner product of the
matrices.  This convention is fixed repo-wide; every objective or constraint
coefficient passes through :meth:`ConicProgram.add_row` /
:meth:`ConicProgram.add_objective`, which apply the scaling.

The backend is the Clarabel interior-point solver, which consumes exactly
this storage.  Its contract: a successful solve returns a point with primal
residual at most 1e-7, minimum eigenvalue of Y at least -1e-7 and relative
duality gap at most 1e-7.  Rows are max-normalized at assembly time (raw
histogram weights produce coefficients spanning seven orders of magnitude,
which otherwise stalls the interior point near the solution).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SQRT2",
    "svec_dim",
    "svec_index",
    "svec_from_matrix",
    "matrix_from_svec",
    "ConicProgram",
    "ConicOptions",
    "ConicResult",
    "solve_program",
    "ConicError",
]

SQRT2 = math.sqrt(2.0)

LE, GE, EQ = "<=", ">=", "=="


class ConicError(RuntimeError):
    """Malformed program or backend breakdown."""


def svec_dim(order: int) -> int:
    return order * (order + 1) // 2


def svec_index(i: int, j: int) -> int:
    """Position of entry (i, j), 0-based with i <= j, in the scaled triangle."""
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


def svec_from_matrix(mat: np.ndarray) -> np.ndarray:
    order = mat.shape[0]
    v = np.empty(svec_dim(order))
    k = 0
    for j in range(order):
        for i in range(j + 1):
            v[k] = mat[i, j] if i == j else SQRT2 * mat[i, j]
            k += 1
    return v


def matrix_from_svec(v: np.ndarray, order: int) -> np.ndarray:
    mat = np.empty((order, order))
    k = 0
    for j in range(order):
        for i in range(j + 1):
            val = v[k] if i == j else v[k] / SQRT2
            mat[i, j] = mat[j, i] = val
            k += 1
    return mat


@dataclass
class ConicProgram:
    """Linear rows and objective over one PSD matrix variable.

    Coefficients passed to :meth:`add_row` and :meth:`add_objective` are in
    matrix space: a key (i, j) with i != j means "coefficient c on the single
    symmetric entry Y_ij", not on the (i, j) and (j, i) cells separately.
    ``meta`` records how the program was built (model kind, penalty weight,
    strengthening tiers); it is provenance only.
    """

    order: int
    objective: np.ndarray = field(default=None)  # type: ignore[assignment]
    senses: list[str] = field(default_factory=list)
    rhs: list[float] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    # COO triplets of the linear rows, in svec coordinates
    _row_idx: list[int] = field(default_factory=list)
    _col_idx: list[int] = field(default_factory=list)
    _values: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ConicError(f"matrix order must be >= 1, got {self.order}")
        if self.objective is None:
            self.objective = np.zeros(svec_dim(self.order))

    @property
    def dim(self) -> int:
        return svec_dim(self.order)

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    def _encode(self, entries: dict[tuple[int, int], float]) -> tuple[list[int], list[float]]:
        cols, vals = [], []
        for (i, j), coef in entries.items():
            if not (0 <= i < self.order and 0 <= j < self.order):
                raise ConicError(f"entry ({i}, {j}) outside order-{self.order} matrix")
            cols.append(svec_index(i, j))
            vals.append(coef if i == j else coef / SQRT2)
        return cols, vals

    def add_row(self, entries: dict[tuple[int, int], float], sense: str, rhs: float) -> None:
        if sense not in (LE, GE, EQ):
            raise ConicError(f"unknown sense {sense!r}")
        r = len(self.rhs)
        cols, vals = self._encode(entries)
        self._row_idx.extend([r] * len(cols))
        self._col_idx.extend(cols)
        self._values.extend(vals)
        self.senses.append(sense)
        self.rhs.append(float(rhs))

    def add_objective(self, entries: dict[tuple[int, int], float]) -> None:
        cols, vals = self._encode(entries)
        for k, v in zip(cols, vals):
            self.objective[k] += v

    def objective_entry(self, i: int, j: int) -> float:
        """Objective coefficient on the symmetric entry Y_ij, in matrix space."""
        v = self.objective[svec_index(i, j)]
        return float(v) if i == j else float(v * SQRT2)

    def copy(self) -> "ConicProgram":
        out = ConicProgram(order=self.order, objective=self.objective.copy(),
                           senses=list(self.senses), rhs=list(self.rhs),
                           meta=dict(self.meta))
        out._row_idx = list(self._row_idx)
        out._col_idx = list(self._col_idx)
        out._values = list(self._values)
        return out

    def with_rows(self, rows: list[tuple[dict[tuple[int, int], float], str, float]]) -> "ConicProgram":
        out = self.copy()
        for entries, sense, rhs in rows:
            out.add_row(entries, sense, rhs)
        return out

    def rows_matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self._values, (self._row_idx, self._col_idx)),
            shape=(self.num_rows, self.dim),
        )

    def row_violations(self, mat: np.ndarray) -> np.ndarray:
        """Signed violation of every linear row at a symmetric matrix (<= 0 means satisfied)."""
        vals = self.rows_matrix() @ svec_from_matrix(mat)
        out = np.empty(self.num_rows)
        for r, (sense, b) in enumerate(zip(self.senses, self.rhs)):
            v = vals[r]
            if sense == LE:
                out[r] = v - b
            elif sense == GE:
                out[r] = b - v
            else:
                out[r] = abs(v - b)
        return out


@dataclass(frozen=True)
class ConicOptions:
    tol: float = 1e-7
    time_limit: float | None = None
    max_iter: int = 200
    verbose: bool = False


@dataclass(frozen=True)
class ConicResult:
    status: str  # Optimal | Infeasible | TimeLimit | IterationLimit | SolverFailure
    svec_y: np.ndarray | None
    primal_objective: float | None
    dual_objective: float | None
    iterations: int
    wall_time: float
    detail: str = ""


def _assemble(prog: ConicProgram):
    """Standard form A y + s = b with s in (zero, nonneg, PSD-triangle) cones."""
    senses = np.asarray(prog.senses, dtype=object)
    rhs = np.asarray(prog.rhs, dtype=float)
    rows = prog.rows_matrix().tocsr()

    eq = np.where(senses == EQ)[0]
    ineq = np.where(senses != EQ)[0]
    sign = np.ones(prog.num_rows)
    sign[np.where(senses == GE)[0]] = -1.0  # flip >= rows into <= form

    ordered = np.concatenate([eq, ineq]).astype(int)
    A_lin = sp.diags(sign[ordered]) @ rows[ordered]
    b_lin = sign[ordered] * rhs[ordered]

    # max-normalize each linear row (empty rows keep scale 1)
    scale = np.abs(A_lin).max(axis=1).toarray().ravel()
    scale[scale == 0.0] = 1.0
    A_lin = sp.diags(1.0 / scale) @ A_lin
    b_lin = b_lin / scale

    A = sp.vstack([A_lin, -sp.identity(prog.dim, format="csc")], format="csc")
    b = np.concatenate([b_lin, np.zeros(prog.dim)])
    return A, b, len(eq), len(ineq)


def solve_program(prog: ConicProgram, opts: ConicOptions = ConicOptions()) -> ConicResult:
    """Run the interior-point backend on the assembled program."""
    import clarabel

    A, b, n_eq, n_ineq = _assemble(prog)
    cones = []
    if n_eq:
        cones.append(clarabel.ZeroConeT(n_eq))
    if n_ineq:
        cones.append(clarabel.NonnegativeConeT(n_ineq))
    cones.append(clarabel.PSDTriangleConeT(prog.order))

    settings = clarabel.DefaultSettings()
    settings.verbose = opts.verbose
    settings.max_iter = opts.max_iter
    # feasibility is driven two orders past the contract so that re-bordering
    # the returned matrix with its exact diagonal stays PSD within tolerance
    settings.tol_feas = opts.tol * 1e-2
    settings.tol_gap_abs = opts.tol
    settings.tol_gap_rel = opts.tol
    if opts.time_limit is not None:
        settings.time_limit = float(opts.time_limit)

    start = time.perf_counter()
    solver = clarabel.DefaultSolver(sp.csc_matrix((prog.dim, prog.dim)),
                                    prog.objective, A, b, cones, settings)
    sol = solver.solve()
    wall = time.perf_counter() - start

    name = str(sol.status)
    svec_y = np.asarray(sol.s[-prog.dim:]) if len(sol.s) >= prog.dim else None
    common = dict(
        svec_y=svec_y,
        primal_objective=float(sol.obj_val),
        dual_objective=float(sol.obj_val_dual),
        iterations=int(sol.iterations),
        wall_time=wall,
        detail=name,
    )
    if name == "Solved":
        return ConicResult(status="Optimal", **common)
    if name == "AlmostSolved":
        # target tolerance missed; accept only if the iterate still honors the contract
        gap = abs(sol.obj_val - sol.obj_val_dual) / max(1.0, abs(sol.obj_val))
        ok = max(sol.r_prim, sol.r_dual) <= opts.tol and gap <= 10 * opts.tol
        return ConicResult(status="Optimal" if ok else "SolverFailure", **common)
    if name in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        return ConicResult(status="Infeasible", svec_y=None, primal_objective=None,
                           dual_objective=None, iterations=int(sol.iterations),
                           wall_time=wall, detail=name)
    if name == "MaxTime":
        return ConicResult(status="TimeLimit", **common)
    if name == "MaxIterations":
        return ConicResult(status="IterationLimit", **common)
    return ConicResult(status="SolverFailure", **common)
