"""Command-line interface.

Subcommands: generate, generate-ce, solve, separate, metrics, road, bench,
plot.  Exit codes: 0 success, 1 usage error, 2 solver failure, 3 timeout
with partial results.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import cuts, emit, metrics
from .conic import ConicOptions
from .core import Instance, load_instance, save_instance
from .instgen import build_ce, generate_instance
from .lp import OPTIMAL, TIME_LIMIT, SolveLimits, build_mkpc, solve_lp, solve_mip
from .sdp import add_strengthening, build_naive, build_penalized, solve_conic, verify_lifted_integrality

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_PARTIAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _load_vector(path: str, n: int) -> list[float]:
    doc = json.loads(Path(path).read_text())
    vec = doc["x"] if isinstance(doc, dict) else doc
    if len(vec) != n:
        raise ValueError(f"solution has length {len(vec)}, instance has n={n}")
    return [float(v) for v in vec]


def _cmd_generate(args) -> int:
    inst = generate_instance(args.n, args.seed)
    save_instance(inst, args.out)
    return EXIT_OK


def _cmd_generate_ce(args) -> int:
    save_instance(build_ce(args.m), args.out)
    return EXIT_OK


def _status_code(status: str) -> int:
    if status == OPTIMAL:
        return EXIT_OK
    if status == TIME_LIMIT:
        return EXIT_PARTIAL
    return EXIT_SOLVER


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    doc: dict = {"model": args.model, "instance": str(args.instance)}
    if args.model in ("lp", "mip"):
        program = build_mkpc(inst)
        if args.model == "lp":
            report = solve_lp(program, time_limit=args.time_limit)
        else:
            report = solve_mip(program, SolveLimits(time_limit=args.time_limit))
        x = list(report.solution.x) if report.solution else None
    else:
        prog = (build_penalized(inst, args.penalty) if args.model.startswith("pen")
                else build_naive(inst))
        if args.model.endswith("+"):
            window = args.triple_window
            if window not in (None, "full"):
                window = int(window)
            prog = add_strengthening(prog, inst, tuple(args.tiers.split(",")), window)
        lifted, report = solve_conic(prog, ConicOptions(time_limit=args.time_limit))
        x = list(lifted.diag_x.x) if lifted is not None else None
        if lifted is not None:
            eigs = np.linalg.eigvalsh(lifted.Y)
            verdict = verify_lifted_integrality(lifted, tol=1e-5)
            doc["eigenvalues"] = {"min": float(eigs[0]), "max": float(eigs[-1]),
                                  "second_largest": float(eigs[-2])}
            doc["integrality"] = {"is_binary": verdict.is_binary,
                                  "rank_y_one": verdict.rank_y_one}
    doc.update({
        "status": report.status,
        "objective": report.objective,
        "bound": report.bound,
        "x": x,
        "selection": sorted(metrics.round_solution(x)) if x is not None else None,
        "nodes": report.node_count,
        "iterations": report.iterations,
        "time": report.wall_time,
    })
    _emit_json(doc, args.out)
    return _status_code(report.status)


def _cmd_separate(args) -> int:
    inst = load_instance(args.instance)
    diag = _load_vector(args.solution, inst.n)
    outcome = cuts.separation_procedure(inst, diag)
    _emit_json({
        "cut": sorted(outcome.cut.subset_s) if outcome.cut else None,
        "cut_outside": list(outcome.cut.outside) if outcome.cut else None,
        "lp_value": outcome.lp_value,
        "dp_value": outcome.dp_value,
    }, args.out)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    inst = load_instance(args.instance)
    x = _load_vector(args.solution, inst.n)
    rep = metrics.metric_report(x, inst, ub=args.ub, lb=args.lb)
    _emit_json({
        "imp": rep.imp,
        "comp": rep.comp,
        "frac": rep.frac,
        "gap_percent": rep.gap_percent,
        "rounded": sorted(rep.rounded),
    }, args.out)
    return EXIT_OK


def _cmd_road(args) -> int:
    inst = load_instance(args.instance)
    x = _load_vector(args.solution, inst.n)
    rep = metrics.road_check(inst, x)
    _emit_json({
        "holds": rep.holds,
        "box_ok": rep.box_ok,
        "knapsack_ok": rep.knapsack_ok,
        "violations": [
            {"i": i, "j": j, "lhs": float(lhs), "rhs": float(rhs)}
            for i, j, lhs, rhs in rep.violations
        ],
    }, args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = bench_mod.BenchConfig.from_json(Path(args.config).read_text())
    records = bench_mod.run_benchmark(cfg)
    failures = [r for r in records if r.status == "SolverFailure"]
    timeouts = [r for r in records if r.status == TIME_LIMIT]
    print(f"{len(records)} records -> {Path(cfg.out_dir) / 'records.csv'}"
          f" ({len(failures)} failures, {len(timeouts)} timeouts)")
    if failures:
        return EXIT_SOLVER
    return EXIT_PARTIAL if timeouts else EXIT_OK


def _cmd_plot(args) -> int:
    records = emit.records_from_csv(args.records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "gap":
        pairings = None
        if args.models:
            names = args.models.split(",")
            pairings = {f"gap_{m.replace('+', '_plus')}": m for m in names}
        emit.emit_gap_curve(records, pairings, out / "gap_curve.csv", out / "gap_curve.svg")
    elif args.kind == "scatter":
        emit.emit_tradeoff_scatter(records, None, out / "tradeoff.csv", out / "tradeoff.svg")
    else:
        emit.emit_fractionality_table(records, out / "fractionality.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="compactknap",
                     description="min-knapsack with compactness: models, relaxations, benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a benchmark instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("generate-ce", help="build a heavy-extremes family instance")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate_ce)

    p = sub.add_parser("solve", help="solve one instance with one model")
    p.add_argument("--model", required=True,
                   choices=["lp", "mip", "sdp", "sdp+", "pen", "pen+"])
    p.add_argument("--instance", required=True)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--lambda", dest="penalty", type=float, default=bench_mod.DEFAULT_LAMBDA)
    p.add_argument("--tiers", default="T1,T2,T3,T4")
    p.add_argument("--triple-window", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("separate", help="separate an insufficient-subset cut")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_separate)

    p = sub.add_parser("metrics", help="score a solution vector")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--ub", type=float, default=None)
    p.add_argument("--lb", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("road", help="check the diagonal-adjusted lift of a vector")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_road)

    p = sub.add_parser("bench", help="run a benchmark configuration")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("plot", help="emit CSV + SVG from benchmark records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=["gap", "scatter", "fractionality"], default="gap")
    p.add_argument("--models", default=None,
                   help="comma-separated model ids for the gap curve")
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
