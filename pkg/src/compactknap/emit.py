"""CSV and SVG emitters for benchmark records.

Every figure is rendered from its CSV alone; the SVG writer is a small
in-repo renderer (polylines, points, axes, legend) with no charting
dependency.  Schemas:

* gap curve:        instance_rank, instance_id, gap_lp, gap_sdp,
                    gap_sdp_plus, gap_misc
* trade-off scatter: instance_id, model, lambda, comp, imp
* fractionality:    model, lambda, records, mean_frac, mean_frac_misc
"""

from __future__ import annotations

import csv
import warnings
from collections import defaultdict
from pathlib import Path

from .bench import RunRecord
from .metrics import gap

__all__ = [
    "emit_gap_curve",
    "emit_tradeoff_scatter",
    "emit_fractionality_table",
    "records_from_csv",
    "DEFAULT_GAP_PAIRINGS",
]

DEFAULT_GAP_PAIRINGS = {
    "gap_lp": "lp",
    "gap_sdp": "sdp",
    "gap_sdp_plus": "sdp+",
    "gap_misc": "sdp++misc1",
}

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#7f7f7f")


def _opt_float(s: str) -> float | None:
    return None if s == "" else float(s)


def records_from_csv(path: str | Path) -> list[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RunRecord(
                instance_id=row["instance_id"],
                model_id=row["model_id"],
                n=int(row["n"]),
                delta=int(row["delta"]),
                lam=_opt_float(row["lam"]),
                status=row["status"],
                objective=_opt_float(row["objective"]),
                bound=_opt_float(row["bound"]),
                imp=_opt_float(row["imp"]),
                comp=_opt_float(row["comp"]),
                frac=_opt_float(row["frac"]),
                sep_lp_value=_opt_float(row["sep_lp_value"]),
                sep_dp_value=_opt_float(row["sep_dp_value"]),
                cut_size=None if row["cut_size"] == "" else int(float(row["cut_size"])),
                rounds_applied=int(row["rounds_applied"]),
                wall_time=float(row["wall_time"]),
                detail=row["detail"],
            ))
    return out


def _by_instance(records: list[RunRecord]) -> dict[str, dict[str, RunRecord]]:
    table: dict[str, dict[str, RunRecord]] = defaultdict(dict)
    for rec in sorted(records, key=lambda r: (r.instance_id, r.model_id)):
        table[rec.instance_id][rec.model_id] = rec
    return table


def _lower_bound(rec: RunRecord | None) -> float | None:
    if rec is None:
        return None
    return rec.bound if rec.bound is not None else rec.objective


def emit_gap_curve(records: list[RunRecord], model_pairings: dict[str, str] | None = None,
                   out_csv: str | Path = "gap_curve.csv",
                   out_svg: str | Path = "gap_curve.svg") -> tuple[Path, Path]:
    """Per-instance relative gaps to the exact objective, sorted by the LP gap.

    ``model_pairings`` maps output columns to model ids.  Instances without an
    exact upper bound are skipped with a warning.  A timed-out relaxation
    still contributes its certified bound.
    """
    pairings = dict(model_pairings or DEFAULT_GAP_PAIRINGS)
    table = _by_instance(records)
    rows = []
    for instance_id, models in table.items():
        mip = models.get("mip")
        if mip is None or mip.objective is None or not mip.objective > 0:
            warnings.warn(f"instance {instance_id}: no exact upper bound; skipped")
            continue
        ub = mip.objective
        row: dict[str, object] = {"instance_id": instance_id}
        for col, model_id in pairings.items():
            lb = _lower_bound(models.get(model_id))
            row[col] = gap(ub, lb) if lb is not None else None
        rows.append(row)
    rows.sort(key=lambda r: (r.get("gap_lp") is None, r.get("gap_lp"), r["instance_id"]))

    header = ["instance_rank", "instance_id", *pairings.keys()]
    out_csv, out_svg = Path(out_csv), Path(out_svg)
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rank, row in enumerate(rows, start=1):
            writer.writerow([rank, row["instance_id"],
                             *(("" if row[c] is None else repr(row[c])) for c in pairings)])

    series = []
    for col in pairings:
        pts = [(rank, row[col]) for rank, row in enumerate(rows, start=1)
               if row[col] is not None]
        if pts:
            series.append((col, [p[0] for p in pts], [p[1] for p in pts]))
    out_svg.write_text(_line_chart(series, "instances by increasing LP gap",
                                   "instance rank", "gap (%)"))
    return out_csv, out_svg


def emit_tradeoff_scatter(records: list[RunRecord], lambda_list=None,
                          out_csv: str | Path = "tradeoff.csv",
                          out_svg: str | Path = "tradeoff.svg") -> tuple[Path, Path]:
    """Compactness versus imprecision, one point per solved record.

    ``lambda_list`` restricts penalized series to the given weights; other
    models always pass the filter.
    """
    keep = []
    for rec in sorted(records, key=lambda r: (r.model_id, r.instance_id)):
        if rec.comp is None or rec.imp is None:
            continue
        if lambda_list is not None and rec.lam is not None and not any(
                abs(rec.lam - lv) <= 1e-12 for lv in lambda_list):
            continue
        keep.append(rec)

    out_csv, out_svg = Path(out_csv), Path(out_svg)
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_id", "model", "lambda", "comp", "imp"])
        for rec in keep:
            writer.writerow([rec.instance_id, rec.model_id,
                             "" if rec.lam is None else repr(rec.lam),
                             repr(rec.comp), repr(rec.imp)])

    groups: dict[str, list[RunRecord]] = defaultdict(list)
    for rec in keep:
        groups[rec.model_id].append(rec)
    series = [(model_id, [r.comp for r in recs], [r.imp for r in recs])
              for model_id, recs in sorted(groups.items())]
    out_svg.write_text(_scatter_chart(series, "compactness / imprecision trade-off",
                                      "comp", "imp"))
    return out_csv, out_svg


def emit_fractionality_table(records: list[RunRecord],
                             out_csv: str | Path = "fractionality.csv") -> Path:
    """Mean fractionality per model, with the separation-round column alongside.

    Model ids ending in ``+miscR`` are folded into their base model's row so
    each row compares the plain solve with its cut-strengthened rerun.
    """
    plain: dict[tuple[str, float | None], list[float]] = defaultdict(list)
    with_misc: dict[tuple[str, float | None], list[float]] = defaultdict(list)
    for rec in records:
        if rec.frac is None:
            continue
        base, _, suffix = rec.model_id.partition("+misc")
        key = (base, rec.lam)
        if rec.model_id != base:
            with_misc[key].append(rec.frac)
        else:
            plain[key].append(rec.frac)

    out_csv = Path(out_csv)
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "lambda", "records", "mean_frac", "mean_frac_misc"])
        for key in sorted(set(plain) | set(with_misc),
                          key=lambda k: (k[0], -1.0 if k[1] is None else k[1])):
            model, lam = key
            vals = plain.get(key, [])
            cut_vals = with_misc.get(key, [])
            writer.writerow([
                model,
                "" if lam is None else repr(lam),
                len(vals) or len(cut_vals),
                repr(sum(vals) / len(vals)) if vals else "",
                repr(sum(cut_vals) / len(cut_vals)) if cut_vals else "",
            ])
    return out_csv


# ---------------------------------------------------------------------------
# minimal SVG rendering
# ---------------------------------------------------------------------------

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 150, 36, 48


def _spans(series):
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    return x0, x1, y0, y1


def _chart(series, title, xlabel, ylabel, draw_lines):
    x0, x1, y0, y1 = _spans(series)
    px = lambda x: _ML + (x - x0) / (x1 - x0) * (_W - _ML - _MR)
    py = lambda y: _H - _MB - (y - y0) / (y1 - y0) * (_H - _MT - _MB)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">{ylabel}</text>',
    ]
    for t in range(5):
        xv = x0 + t * (x1 - x0) / 4
        yv = y0 + t * (y1 - y0) / 4
        out.append(f'<line x1="{px(xv):.1f}" y1="{_H - _MB}" x2="{px(xv):.1f}" '
                   f'y2="{_H - _MB + 4}" stroke="black"/>')
        out.append(f'<text x="{px(xv):.1f}" y="{_H - _MB + 16}" text-anchor="middle">'
                   f'{xv:.3g}</text>')
        out.append(f'<line x1="{_ML - 4}" y1="{py(yv):.1f}" x2="{_ML}" '
                   f'y2="{py(yv):.1f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 7}" y="{py(yv) + 3:.1f}" text-anchor="end">{yv:.3g}</text>')
    for idx, (label, sx, sy) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        if draw_lines and len(sx) > 1:
            pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(sx, sy))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            for x, y in zip(sx, sy):
                out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" '
                           f'fill="{color}" fill-opacity="0.7"/>')
        ly = _MT + 16 * idx
        out.append(f'<rect x="{_W - _MR + 8}" y="{ly}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{_W - _MR + 22}" y="{ly + 9}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _line_chart(series, title, xlabel, ylabel):
    return _chart(series, title, xlabel, ylabel, draw_lines=True)


def _scatter_chart(series, title, xlabel, ylabel):
    return _chart(series, title, xlabel, ylabel, draw_lines=False)
