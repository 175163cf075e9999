"""Min-knapsack with compactness constraints: models, relaxations, cuts, benchmarks."""

from .core import (
    FeasibilityReport,
    Instance,
    MaxKnapsack,
    PairCoefficient,
    Selection,
    SolutionVector,
    check_selection,
    compactness_pairs,
    complement_instance,
    instance_from_json,
    instance_to_json,
    load_instance,
    save_instance,
    validate_instance,
)
from .instgen import GenParams, build_ce, generate_instance
from .lp import (
    LinearProgram,
    SolveLimits,
    SolveReport,
    SolverError,
    build_mkpc,
    enumerate_exact,
    solve_lp,
    solve_mip,
)
from .conic import ConicOptions, ConicProgram
from .sdp import (
    LiftedSolution,
    PenaltyWeight,
    add_strengthening,
    build_naive,
    build_penalized,
    rank_one_lift,
    road_lift,
    solve_conic,
    verify_lifted_integrality,
)
from .cuts import (
    MiscCut,
    SeparationProblem,
    greedy_maximalize,
    make_misc_cut,
    separation_dp,
    separation_lp_check,
    separation_procedure,
)
from .metrics import (
    bound_order_check,
    comp,
    frac,
    gap,
    imp,
    metric_report,
    road_check,
    round_solution,
)
from .bench import BenchConfig, ModelSpec, RunRecord, run_benchmark

__version__ = "0.1.0"
