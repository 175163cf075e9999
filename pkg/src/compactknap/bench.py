"""Batch experiment runner over (instance, model) pairs.

Each pair is solved independently and becomes one record; records are
appended to a CSV as they complete, so finished rows survive an interrupted
run.  With one worker the run is fully deterministic (modulo the timing
column); with several workers the set of rows is the same and a canonical
sort is applied before any emission.

Model names: ``lp``, ``mip``, ``sdp`` (naive relaxation), ``sdp+``
(strengthened), ``pen`` (penalized), ``pen+`` (strengthened penalized).
Conic models accept a number of separation rounds: after each solve one
insufficient-subset cut is separated and, if violated, added before
re-solving.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import cuts, metrics
from .conic import ConicOptions, ConicProgram
from .core import Instance, load_instance
from .instgen import generate_instance
from .lp import OPTIMAL, TIME_LIMIT, SolveLimits, build_mkpc, solve_lp, solve_mip
from .sdp import ALL_TIERS, add_strengthening, build_naive, build_penalized, solve_conic

__all__ = [
    "ModelSpec",
    "BenchConfig",
    "RunRecord",
    "run_benchmark",
    "run_single",
    "CSV_COLUMNS",
    "WORKERS_ENV",
]

WORKERS_ENV = "COMPACTKNAP_WORKERS"

CONIC_MODELS = ("sdp", "sdp+", "pen", "pen+")
ALL_MODELS = ("lp", "mip") + CONIC_MODELS

#: Balanced default for single-penalty runs.
DEFAULT_LAMBDA = 1e-3


@dataclass(frozen=True)
class ModelSpec:
    model: str
    lam: float = DEFAULT_LAMBDA
    tiers: tuple[str, ...] = ALL_TIERS
    triple_window: int | str | None = None
    misc_rounds: int = 0
    time_limit: float | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if self.model not in ALL_MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {ALL_MODELS}")
        if self.lam < 0:
            raise ValueError(f"penalty weight must be >= 0, got {self.lam}")
        if self.misc_rounds < 0:
            raise ValueError(f"misc_rounds must be >= 0, got {self.misc_rounds}")

    @property
    def model_id(self) -> str:
        if self.label:
            return self.label
        name = self.model
        if self.model.startswith("pen"):
            name += f"@{self.lam:g}"
        if self.misc_rounds:
            name += f"+misc{self.misc_rounds}"
        return name


@dataclass(frozen=True)
class BenchConfig:
    models: tuple[ModelSpec, ...]
    instances_dir: str | None = None
    generator: dict | None = None  # {"count": int, "n": int, "seed_base": int}
    time_limit: float = 600.0
    out_dir: str = "bench-out"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if (self.instances_dir is None) == (self.generator is None):
            raise ValueError("exactly one of instances_dir / generator must be set")

    @classmethod
    def from_json(cls, text: str) -> "BenchConfig":
        doc = json.loads(text)
        specs = []
        for m in doc["models"]:
            kw = dict(m)
            if "tiers" in kw:
                kw["tiers"] = tuple(kw["tiers"])
            specs.append(ModelSpec(**kw))
        models = tuple(specs)
        return cls(
            models=models,
            instances_dir=doc.get("instances_dir"),
            generator=doc.get("generator"),
            time_limit=float(doc.get("time_limit", 600.0)),
            out_dir=doc.get("out_dir", "bench-out"),
            workers=int(doc.get("workers", 1)),
        )


@dataclass(frozen=True)
class RunRecord:
    instance_id: str
    model_id: str
    n: int
    delta: int
    lam: float | None
    status: str
    objective: float | None
    bound: float | None
    imp: float | None
    comp: float | None
    frac: float | None
    sep_lp_value: float | None
    sep_dp_value: float | None
    cut_size: int | None
    rounds_applied: int
    wall_time: float
    detail: str = ""


CSV_COLUMNS = tuple(f.name for f in fields(RunRecord))
#: Columns that legitimately differ between reruns of the same configuration.
TIMING_COLUMNS = ("wall_time",)


def _fixed_tiers(spec: ModelSpec) -> tuple[str, ...]:
    return tuple(t for t in ALL_TIERS if t in spec.tiers)


def _solve_conic_model(inst: Instance, spec: ModelSpec, time_limit: float):
    if spec.model.startswith("pen"):
        prog: ConicProgram = build_penalized(inst, spec.lam)
    else:
        prog = build_naive(inst)
    if spec.model.endswith("+"):
        prog = add_strengthening(prog, inst, _fixed_tiers(spec), spec.triple_window)
    opts = ConicOptions(time_limit=time_limit)
    lifted, report = solve_conic(prog, opts)
    sep_lp = sep_dp = cut_size = None
    rounds = 0
    for _ in range(spec.misc_rounds):
        if lifted is None or report.status != OPTIMAL:
            break
        outcome = cuts.separation_procedure(inst, lifted)
        sep_lp, sep_dp = outcome.lp_value, outcome.dp_value
        if outcome.cut is None:
            break
        cut_size = len(outcome.cut.subset_s)
        prog = prog.with_rows([cuts.conic_cut_row(outcome.cut)])
        lifted, report = solve_conic(prog, opts)
        rounds += 1
    return lifted, report, sep_lp, sep_dp, cut_size, rounds


def run_single(inst: Instance, instance_id: str, spec: ModelSpec,
               default_time_limit: float) -> RunRecord:
    """Solve one (instance, model) pair; failures become records, not exceptions."""
    time_limit = spec.time_limit if spec.time_limit is not None else default_time_limit
    lam = spec.lam if spec.model.startswith("pen") else None
    base = dict(instance_id=instance_id, model_id=spec.model_id, n=inst.n,
                delta=inst.delta, lam=lam)
    try:
        sep_lp = sep_dp = cut_size = None
        rounds = 0
        if spec.model == "lp":
            report = solve_lp(build_mkpc(inst), time_limit=time_limit)
            x = report.solution
        elif spec.model == "mip":
            report = solve_mip(build_mkpc(inst), SolveLimits(time_limit=time_limit))
            x = report.solution
        else:
            lifted, report, sep_lp, sep_dp, cut_size, rounds = _solve_conic_model(
                inst, spec, time_limit)
            x = lifted.diag_x if lifted is not None else None
        scores = metrics.metric_report(x, inst) if x is not None else None
        return RunRecord(
            **base,
            status=report.status,
            objective=report.objective,
            bound=report.bound,
            imp=scores.imp if scores else None,
            comp=scores.comp if scores else None,
            frac=scores.frac if scores else None,
            sep_lp_value=sep_lp,
            sep_dp_value=sep_dp,
            cut_size=cut_size,
            rounds_applied=rounds,
            wall_time=report.wall_time,
            detail=report.detail,
        )
    except Exception as exc:  # noqa: BLE001 - batch must survive any solve failure
        return RunRecord(
            **base, status="SolverFailure", objective=None, bound=None,
            imp=None, comp=None, frac=None, sep_lp_value=None, sep_dp_value=None,
            cut_size=None, rounds_applied=0, wall_time=0.0,
            detail=f"{type(exc).__name__}: {exc}",
        )


def resolve_instances(cfg: BenchConfig) -> list[tuple[str, Instance]]:
    if cfg.instances_dir is not None:
        paths = sorted(Path(cfg.instances_dir).glob("*.json"))
        return [(p.stem, load_instance(p)) for p in paths]
    gen = cfg.generator or {}
    count, n = int(gen["count"]), int(gen["n"])
    base = int(gen.get("seed_base", 0))
    return [(f"gen-n{n}-s{base + i}", generate_instance(n, base + i))
            for i in range(count)]


def _record_to_row(rec: RunRecord) -> list:
    return [getattr(rec, c) for c in CSV_COLUMNS]


def _run_pair(args) -> RunRecord:
    inst, instance_id, spec, time_limit = args
    return run_single(inst, instance_id, spec, time_limit)


def worker_count(cfg: BenchConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, cfg.workers)


def run_benchmark(cfg: BenchConfig, csv_path: str | Path | None = None) -> list[RunRecord]:
    """Solve every (instance, model) pair and persist records incrementally.

    Returns the records in canonical order (instance_id, model_id).  The CSV
    keeps completion order; rerunning a single-worker configuration
    reproduces it except for the timing column.
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = Path(csv_path) if csv_path is not None else out_dir / "records.csv"
    pairs = [(inst, iid, spec, cfg.time_limit)
             for iid, inst in resolve_instances(cfg)
             for spec in cfg.models]
    records: list[RunRecord] = []
    workers = worker_count(cfg)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        fh.flush()

        def sink(rec: RunRecord) -> None:
            records.append(rec)
            writer.writerow(_record_to_row(rec))
            fh.flush()

        if workers == 1 or len(pairs) <= 1:
            for args in pairs:
                sink(_run_pair(args))
        else:
            # work-stealing pool; the sink stays single-writer in this process
            with ProcessPoolExecutor(max_workers=workers) as pool:
                pending = {pool.submit(_run_pair, args) for args in pairs}
                while pending:
                    done, pending = wait(pending, return_when=FIRST_COMPLETED)
                    for fut in done:
                        sink(fut.result())
    records.sort(key=lambda r: (r.instance_id, r.model_id))
    return records
