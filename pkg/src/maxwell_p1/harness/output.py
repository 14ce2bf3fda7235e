"""Tables, CSV, JSON and log-log SVG plots of study results."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .study import StudyResult, fit_applies

CSV_HEADER = ["m", "level", "nel", "nno", "h", "tau", "e1", "r1", "e2", "r2", "e3", "r3",
              "slope_fit_applies"]

_TABLE_COLUMNS = [
    ("l", 3), ("nel", 6), ("nno", 6), ("e^1", 12), ("e^1_{l-1}/e^1_l", 16),
    ("e^2", 12), ("e^2_{l-1}/e^2_l", 16), ("e^3", 12), ("e^3_{l-1}/e^3_l", 16),
]


def _g6(v) -> str:
    if v is None:
        return ""
    return f"{v:.6g}"


def emit_table(result: StudyResult, m: int) -> str:
    """Fixed-width table for one exponent, columns in the usual convergence-table order."""
    lines = []
    header = "  ".join(name.rjust(w) for name, w in _TABLE_COLUMNS)
    lines.append(f"m = {m}")
    lines.append(header)
    lines.append("-" * len(header))
    for r in result.runs_for(m):
        if r.ok:
            cells = [str(r.level), str(r.nel), str(r.nno), _g6(r.e1), _g6(r.r1),
                     _g6(r.e2), _g6(r.r2), _g6(r.e3), _g6(r.r3)]
        else:
            cells = [str(r.level), str(r.nel), str(r.nno), f"blow-up@{r.blowup_step}"] + [""] * 5
        lines.append("  ".join(c.rjust(w) for c, (_, w) in zip(cells, _TABLE_COLUMNS)))
    fits = result.slopes.get(m) or {}
    if fits:
        parts = [f"{k}: {v.slope:.3f}" for k, v in sorted(fits.items())]
        lv = next(iter(fits.values())).levels
        lines.append(f"fitted slopes over levels {lv[0]}..{lv[-1]}: " + ", ".join(parts))
    return "\n".join(lines) + "\n"


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def csv_text(result: StudyResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.runs:
        w.writerow([r.m, r.level, r.nel, r.nno, _num(r.h), _num(r.tau),
                    _num(r.e1), _num(r.r1), _num(r.e2), _num(r.r2), _num(r.e3), _num(r.r3),
                    str(fit_applies(result, r)).lower()])
    return buf.getvalue()


def json_text(result: StudyResult, include_timing: bool = False) -> str:
    return json.dumps(result.to_dict(include_timing), indent=2, sort_keys=True) + "\n"


def emit_csv(result: StudyResult, path) -> Path:
    path = Path(path)
    path.write_text(csv_text(result))
    return path


def emit_json(result: StudyResult, path, include_timing: bool = False) -> Path:
    path = Path(path)
    path.write_text(json_text(result, include_timing))
    return path


def load_json(path) -> StudyResult:
    return StudyResult.from_dict(json.loads(Path(path).read_text()))


# --- SVG ---------------------------------------------------------------------

_W, _H = 560, 420
_MARGIN = dict(left=70, right=150, top=30, bottom=55)
_SERIES = [("e1", "L2 error", "#1f77b4"), ("e2", "H1-seminorm error", "#d62728"),
           ("e3", "time-derivative error", "#2ca02c")]


def svg_text(result: StudyResult, m: int) -> str:
    """Log-log plot of the three relative errors against h with slope-1/2 guides."""
    runs = [r for r in result.runs_for(m) if r.ok]
    pts = [(r.h, getattr(r, k)) for r in runs for k, *_ in _SERIES if getattr(r, k)]
    if not pts:
        raise ValueError(f"no completed runs to plot for m={m}")
    hs = [p[0] for p in pts]
    es = [p[1] for p in pts]
    x_lo, x_hi = math.floor(math.log10(min(hs))), math.ceil(math.log10(max(hs)))
    y_lo, y_hi = math.floor(math.log10(min(es))), math.ceil(math.log10(max(es)))
    if x_hi == x_lo:
        x_hi += 1
    if y_hi == y_lo:
        y_hi += 1
    pw = _W - _MARGIN["left"] - _MARGIN["right"]
    ph = _H - _MARGIN["top"] - _MARGIN["bottom"]

    def px(h):
        return _MARGIN["left"] + (math.log10(h) - x_lo) / (x_hi - x_lo) * pw

    def py(e):
        return _MARGIN["top"] + (y_hi - math.log10(e)) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<title>Maximum in time of relative errors, m={m}</title>',
        f'<rect x="{_MARGIN["left"]}" y="{_MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for d in range(x_lo, x_hi + 1):
        x = px(10.0**d)
        out.append(f'<line x1="{x:.2f}" y1="{_MARGIN["top"] + ph}" x2="{x:.2f}" '
                   f'y2="{_MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{_MARGIN["top"] + ph + 20}" '
                   f'text-anchor="middle">1e{d}</text>')
    for d in range(y_lo, y_hi + 1):
        y = py(10.0**d)
        out.append(f'<line x1="{_MARGIN["left"] - 5}" y1="{y:.2f}" x2="{_MARGIN["left"]}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_MARGIN["left"] - 8}" y="{y + 4:.2f}" '
                   f'text-anchor="end">1e{d}</text>')
    out.append(f'<text x="{_MARGIN["left"] + pw / 2:.1f}" y="{_H - 12}" '
               'text-anchor="middle">h</text>')

    # Guide lines anchored at the coarsest point of the first series.
    h0, h1 = max(hs), min(hs)
    e0 = max(es)
    for slope, label in ((1, "slope 1"), (2, "slope 2")):
        e_end = e0 * (h1 / h0) ** slope
        out.append(
            f'<line class="guide" x1="{px(h0):.2f}" y1="{py(e0):.2f}" x2="{px(h1):.2f}" '
            f'y2="{py(e_end):.2f}" stroke="gray" stroke-dasharray="6,4"/>'
        )
        out.append(f'<text x="{px(h1) + 4:.2f}" y="{py(e_end):.2f}" fill="gray">{label}</text>')

    legend_y = _MARGIN["top"] + 10
    for i, (key, label, color) in enumerate(_SERIES):
        series = [(r.h, getattr(r, key)) for r in runs if getattr(r, key)]
        coords = " ".join(f"{px(h):.2f},{py(e):.2f}" for h, e in series)
        out.append(f'<polyline class="series" points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="2"/>')
        for h, e in series:
            out.append(f'<circle cx="{px(h):.2f}" cy="{py(e):.2f}" r="3" fill="{color}"/>')
        ly = legend_y + 18 * i
        lx = _MARGIN["left"] + pw + 10
        out.append(f'<rect x="{lx}" y="{ly - 8}" width="12" height="3" fill="{color}"/>')
        out.append(f'<text x="{lx + 16}" y="{ly - 3}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(result: StudyResult, m: int, path) -> Path:
    path = Path(path)
    path.write_text(svg_text(result, m))
    return path


def write_outputs(result: StudyResult) -> list[Path]:
    """Write every requested format into ``result.config.out``."""
    cfg = result.config
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "table" in cfg.formats:
        p = out / "tables.txt"
        p.write_text("\n".join(emit_table(result, m) for m in cfg.m_values))
        written.append(p)
    if "csv" in cfg.formats:
        written.append(emit_csv(result, out / "results.csv"))
    if "json" in cfg.formats:
        written.append(emit_json(result, out / "results.json", cfg.timings))
    if "svg" in cfg.formats:
        for m in cfg.m_values:
            if any(r.ok for r in result.runs_for(m)):
                written.append(emit_svg(result, m, out / f"convergence_m{m}.svg"))
    return written
