import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape

import numpy as np
import pandas as pd

from schemas.audit import CELL_KEYS, AuditReport
from schemas.repair import AmountScore
from schemas.sweep import METRICS, AxisValue, SweepResult
from services.exceptions import IoError, NotTwoDimensional
from services.metrics_service import passes_eighty_percent_rule

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SWEEP_COLUMNS = ("repeat", "us_s", "di_s", "balanced_accuracy", "defined", "seed")
MEDIAN_COLUMNS = ("us_s_median", "di_s_median", "balanced_accuracy_median", "n_defined", "n_skipped")

# Heatmap ramp end points; every channel rises, so lower values are darker
DARK = (8, 29, 88)
LIGHT = (255, 255, 217)
UNDEFINED_FILL = "#bdbdbd"

CELL_WIDTH = 84
CELL_HEIGHT = 48
FONT = "font: 12px sans-serif"


# ==== CSV ====


def _fmt(value: Optional[Union[float, int, str]]) -> str:
    """Shortest round-tripping text; empty for undefined"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_frame(rows: List[Dict[str, str]], columns: Sequence[str], path: PathLike) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows, columns=list(columns)).to_csv(
            path, index=False, encoding="utf-8", lineterminator="\r\n",
        )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def medians_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_medians{path.suffix or '.csv'}")


def write_sweep_csv(r: SweepResult, path: PathLike) -> Path:
    """
    One row per (cell, repeat), plus a companion <stem>_medians.csv with one
    row per cell. Returns the medians path.
    """
    axes = r.axis_names
    rows, median_rows = [], []
    for cell in r.cells:
        coords = {name: _fmt(cell.coords[name]) for name in axes}
        for record in cell.records:
            rows.append({
                **coords,
                "repeat": _fmt(record.repeat),
                "us_s": _fmt(record.metric("us_s")),
                "di_s": _fmt(record.metric("di_s")),
                "balanced_accuracy": _fmt(record.metric("balanced_accuracy")),
                "defined": _fmt(record.defined),
                "seed": _fmt(record.seed),
            })
        median_rows.append({
            **coords,
            "us_s_median": _fmt(cell.medians.us_s),
            "di_s_median": _fmt(cell.medians.di_s),
            "balanced_accuracy_median": _fmt(cell.medians.balanced_accuracy),
            "n_defined": _fmt(cell.medians.n_defined),
            "n_skipped": _fmt(cell.medians.n_skipped),
        })

    _write_frame(rows, [*axes, *SWEEP_COLUMNS], path)
    companion = medians_path(path)
    _write_frame(median_rows, [*axes, *MEDIAN_COLUMNS], companion)
    logger.info(f"Wrote {len(rows)} repeat rows to {path} and {len(median_rows)} cell medians to {companion}")
    return companion


def write_audit_csv(report: AuditReport, path: PathLike) -> None:
    """One AuditReport as a single CSV row, contingency counts included"""
    row = {
        "us_s": _fmt(report.us_s),
        "di_s": _fmt(report.di_s),
        "balanced_accuracy": _fmt(report.balanced_accuracy),
        "us_defined": _fmt(report.us_defined),
        "passes_80_rule": _fmt(passes_eighty_percent_rule(report.di_s)) if report.di_defined else "",
        "n_test": _fmt(report.n_test),
        **{key: _fmt(report.counts.counts[key]) for key in CELL_KEYS},
    }
    _write_frame([row], list(row), path)


def write_amount_scores_csv(scores: Sequence[AmountScore], path: PathLike) -> None:
    rows = [
        {
            "amount": _fmt(s.amount),
            "median_us_s": _fmt(s.median_us_s),
            "median_balanced_accuracy": _fmt(s.median_balanced_accuracy),
            "objective": _fmt(s.objective),
            "defined_folds": _fmt(s.defined_folds),
            "folds": _fmt(s.folds),
        }
        for s in scores
    ]
    columns = ["amount", "median_us_s", "median_balanced_accuracy", "objective", "defined_folds", "folds"]
    _write_frame(rows, columns, path)


# ==== SVG ====


def _label(value: AxisValue) -> str:
    return f"{value:g}" if isinstance(value, float) else str(value)


def ramp_color(t: float) -> str:
    """Linear blend from DARK (t=0) to LIGHT (t=1)"""
    t = min(max(t, 0.0), 1.0)
    r, g, b = (round(d + t * (l - d)) for d, l in zip(DARK, LIGHT))
    return "#%02x%02x%02x" % (r, g, b)


def _text(x: float, y: float, content: str, anchor: str = "middle", extra: str = "") -> str:
    return '<text x="%(x).1f" y="%(y).1f" text-anchor="%(anchor)s"%(extra)s>%(content)s</text>' % dict(
        x=x, y=y, anchor=anchor, extra=extra, content=escape(content),
    )


def _write_svg(parts: List[str], width: int, height: int, path: PathLike) -> None:
    head = (
        '<svg viewBox="0,0,%(width)d,%(height)d" width="%(width)d" height="%(height)d" '
        'style="%(font)s" xmlns="http://www.w3.org/2000/svg">' % dict(width=width, height=height, font=FONT)
    )
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write('<?xml version="1.0" encoding="UTF-8"?>\n')
            f.write(head + "\n")
            for part in parts:
                f.write(part + "\n")
            f.write("</svg>\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _value_range(values: np.ndarray) -> Optional[Tuple[float, float]]:
    defined = values[~np.isnan(values)]
    if defined.size == 0:
        return None
    return float(defined.min()), float(defined.max())


def render_heatmap(r: SweepResult, metric: str, path: PathLike) -> None:
    """
    Standalone SVG heatmap of per-cell medians.

    Rows follow the first axis, columns the second. Lower values are darker;
    undefined cells are gray and labelled n/a.
    """
    if len(r.axes) != 2:
        raise NotTwoDimensional(f"heatmap needs a 2-D sweep, got axes {r.axis_names}")
    if metric not in METRICS:
        raise ValueError(f"Unknown metric '{metric}'; choose from {METRICS}")
    row_axis, col_axis = r.axis_names
    grid = r.median_grid(metric)
    n_rows, n_cols = grid.shape
    bounds = _value_range(grid)

    left, top = 130, 70
    width = left + n_cols * CELL_WIDTH + 40
    legend_top = top + n_rows * CELL_HEIGHT + 30
    height = legend_top + 60

    parts = [
        _text(left, 24, f"median {metric} ({r.metadata.family.value}, {r.metadata.learner})", anchor="start"),
        _text(left + n_cols * CELL_WIDTH / 2, top - 30, col_axis),
        _text(16, top + n_rows * CELL_HEIGHT / 2, row_axis,
              extra=' transform="rotate(-90 16 %.1f)"' % (top + n_rows * CELL_HEIGHT / 2)),
    ]
    for j, value in enumerate(r.axes[col_axis]):
        parts.append(_text(left + (j + 0.5) * CELL_WIDTH, top - 8, _label(value)))
    for i, value in enumerate(r.axes[row_axis]):
        parts.append(_text(left - 8, top + (i + 0.5) * CELL_HEIGHT + 4, _label(value), anchor="end"))

    for i in range(n_rows):
        for j in range(n_cols):
            value = grid[i, j]
            x, y = left + j * CELL_WIDTH, top + i * CELL_HEIGHT
            if math.isnan(value):
                fill, caption, t = UNDEFINED_FILL, "n/a", 1.0
            else:
                lo, hi = bounds
                t = 0.5 if hi == lo else (value - lo) / (hi - lo)
                fill, caption = ramp_color(t), f"{value:.3f}"
            parts.append(
                '<rect class="cell" x="%(x)d" y="%(y)d" width="%(w)d" height="%(h)d" fill="%(fill)s" stroke="#ffffff">'
                '<title>%(title)s</title></rect>' % dict(
                    x=x, y=y, w=CELL_WIDTH, h=CELL_HEIGHT, fill=fill,
                    title=escape(f"{row_axis}={_label(r.axes[row_axis][i])}, "
                                 f"{col_axis}={_label(r.axes[col_axis][j])}: {caption}"),
                )
            )
            parts.append(_text(
                x + CELL_WIDTH / 2, y + CELL_HEIGHT / 2 + 4, caption,
                extra=' fill="%s"' % ("#ffffff" if t < 0.5 else "#000000"),
            ))

    # legend: ramp swatches with the value range as text
    parts.append(_text(left, legend_top - 6, f"legend: {metric}", anchor="start"))
    for k in range(10):
        parts.append('<rect x="%d" y="%d" width="20" height="14" fill="%s"/>' % (
            left + k * 20, legend_top, ramp_color(k / 9)))
    if bounds is None:
        legend = "all cells undefined"
    elif bounds[0] == bounds[1]:
        legend = f"{bounds[0]:.3f}"
    else:
        legend = f"min {bounds[0]:.3f} (dark) .. max {bounds[1]:.3f} (light)"
    parts.append(_text(left + 210, legend_top + 12, legend, anchor="start"))
    parts.append('<rect x="%d" y="%d" width="14" height="14" fill="%s"/>' % (left, legend_top + 24, UNDEFINED_FILL))
    parts.append(_text(left + 20, legend_top + 36, "undefined (n/a)", anchor="start"))

    _write_svg(parts, width, height, path)
    logger.info(f"Wrote {n_rows}x{n_cols} heatmap of {metric} to {path}")


def render_curve(r: SweepResult, metric: str, path: PathLike) -> None:
    """SVG line chart of per-cell medians along the single axis of a 1-D sweep"""
    if len(r.axes) != 1:
        raise ValueError(f"curve needs a 1-D sweep, got axes {r.axis_names}")
    if metric not in METRICS:
        raise ValueError(f"Unknown metric '{metric}'; choose from {METRICS}")
    axis = r.axis_names[0]
    labels = r.axes[axis]
    values = r.median_grid(metric)
    numeric = all(isinstance(v, float) for v in labels)
    xs = np.array(labels, dtype=np.float64) if numeric else np.arange(len(labels), dtype=np.float64)
    # log-spaced grids (regularization) are drawn on a log axis
    log_x = numeric and bool(np.all(xs > 0)) and len(xs) > 1 and xs.max() / xs.min() >= 100
    if log_x:
        xs = np.log10(xs)

    left, top, plot_w, plot_h = 70, 40, 480, 260
    width, height = left + plot_w + 30, top + plot_h + 60
    x_lo, x_hi = float(xs.min()), float(xs.max())
    bounds = _value_range(values) or (0.0, 1.0)
    y_lo, y_hi = bounds
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def px(x: float) -> float:
        return left + (0.5 if x_hi == x_lo else (x - x_lo) / (x_hi - x_lo)) * plot_w

    def py(y: float) -> float:
        return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        _text(left, 24, f"median {metric} vs {axis} ({r.metadata.learner})", anchor="start"),
        '<rect x="%d" y="%d" width="%d" height="%d" fill="none" stroke="#444444"/>' % (left, top, plot_w, plot_h),
        _text(left + plot_w / 2, height - 12, f"log10 {axis}" if log_x else axis),
        _text(left - 8, top + 4, f"{y_hi:.3f}", anchor="end"),
        _text(left - 8, top + plot_h + 4, f"{y_lo:.3f}", anchor="end"),
    ]
    points = []
    for x, label, value in zip(xs, labels, values):
        parts.append(_text(px(x), top + plot_h + 18, _label(label)))
        if not math.isnan(value):
            points.append((px(x), py(value)))
            parts.append('<circle cx="%.1f" cy="%.1f" r="4" fill="%s"><title>%s</title></circle>' % (
                px(x), py(value), ramp_color(0.0), escape(f"{axis}={_label(label)}: {value:.4f}")))
    if len(points) > 1:
        parts.append('<polyline fill="none" stroke="%s" stroke-width="2" points="%s"/>' % (
            ramp_color(0.0), " ".join("%.1f,%.1f" % p for p in points)))

    _write_svg(parts, width, height, path)
    logger.info(f"Wrote curve of {metric} over {axis} to {path}")
