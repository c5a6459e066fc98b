"""CSV/JSON serialization and minimal SVG line plots for experiment output.

Numeric CSV fields use 17 significant digits, which round-trips float64
exactly.  SVG rendering is a pure function of the plot spec: identical
specs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

from .errors import InvalidInputs
from .experiments import ExperimentResult, LogErrorRecord, MinSampleRecord

CSV_FIELDS = ("model", "x", "mean", "stderr", "theoretical", "censored")

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return ""
    return f"{value:.17g}"


def result_rows(result: ExperimentResult, model: str | None = None) -> list[tuple]:
    """Normalize records to (model, x, mean, stderr, theoretical, censored)."""
    rows = []
    for rec in result.records:
        if model is not None and rec.model != model:
            continue
        if isinstance(rec, MinSampleRecord):
            rows.append(
                (rec.model, rec.n, rec.mean_min_m, rec.stderr_min_m, None, rec.censored)
            )
        elif isinstance(rec, LogErrorRecord):
            rows.append(
                (
                    rec.model,
                    rec.m,
                    rec.mean_spectral_error,
                    rec.stderr_spectral_error,
                    rec.theoretical_bound,
                    0,
                )
            )
        else:
            raise InvalidInputs(f"unknown record type {type(rec).__name__}")
    return rows


def write_csv(result: ExperimentResult, path, model: str | None = None) -> None:
    """One row per (model, abscissa) record under the fixed header."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_FIELDS)
        for mod, x, mean, stderr, theo, censored in result_rows(result, model):
            writer.writerow(
                [mod, str(x), _fmt(mean), _fmt(stderr), _fmt(theo), str(censored)]
            )


def read_csv_rows(path) -> list[tuple]:
    """Parse a file written by :func:`write_csv` back into row tuples."""
    rows = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != CSV_FIELDS:
            raise InvalidInputs(f"unexpected CSV header {header}")
        for raw in reader:
            model, x, mean, stderr, theo, censored = raw
            rows.append(
                (
                    model,
                    int(x),
                    float(mean) if mean else None,
                    float(stderr) if stderr else None,
                    float(theo) if theo else None,
                    int(censored),
                )
            )
    return rows


def result_to_dict(result: ExperimentResult) -> dict:
    """JSON-ready dict mirroring the result's field names."""
    return {
        "experiment": result.experiment,
        "metadata": result.metadata,
        "records": [
            {k: _jsonable(v) for k, v in asdict(rec).items()} for rec in result.records
        ],
        "fits": {label: asdict(fit) for label, fit in result.fits.items()},
        "warnings": list(result.warnings),
    }


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(payload: dict, path) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


@dataclass(frozen=True)
class Series:
    label: str
    points: tuple
    style: str = "solid"


@dataclass(frozen=True)
class PlotSpec:
    """Description of one line plot; validated on construction."""

    title: str
    x_label: str
    y_label: str
    series: tuple
    output_path: str

    def __post_init__(self):
        if not self.series:
            raise InvalidInputs("a plot needs at least one series")
        for s in self.series:
            if len(s.points) < 2:
                raise InvalidInputs(f"series {s.label!r} needs at least two points")
            if s.style not in ("solid", "dashed"):
                raise InvalidInputs(f"unknown style {s.style!r}")
            for x, y in s.points:
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise InvalidInputs(f"series {s.label!r} has non-finite points")


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(c * mag for c in (1.0, 2.0, 2.5, 5.0, 10.0) if c * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(t)
        t += step
    return ticks


def render_svg(spec: PlotSpec) -> None:
    """Write a standalone SVG with axes, tick labels, legend, and polylines."""
    width, height = 720, 480
    ml, mr, mt, mb = 70, 24, 42, 56
    pw, ph = width - ml - mr, height - mt - mb

    xs = [x for s in spec.series for x, _ in s.points]
    ys = [y for s in spec.series for _, y in s.points]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if xhi == xlo:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    if yhi == ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    ypad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - ypad, yhi + ypad

    def px(x: float) -> float:
        return ml + (x - xlo) / (xhi - xlo) * pw

    def py(y: float) -> float:
        return mt + ph - (y - ylo) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{spec.title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#444444" stroke-width="1"/>',
    ]
    for t in _nice_ticks(xlo, xhi):
        x = px(t)
        out.append(
            f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 5}" '
            f'stroke="#444444"/>'
        )
        out.append(
            f'<text x="{x:.2f}" y="{mt + ph + 19}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:.6g}</text>'
        )
    for t in _nice_ticks(ylo, yhi):
        y = py(t)
        out.append(
            f'<line x1="{ml - 5}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" stroke="#444444"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{t:.6g}</text>'
        )
    out.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{spec.x_label}</text>'
    )
    out.append(
        f'<text x="20" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {mt + ph / 2:.1f})">{spec.y_label}</text>'
    )
    for i, s in enumerate(spec.series):
        color = _PALETTE[i % len(_PALETTE)]
        dash = ' stroke-dasharray="7,4"' if s.style == "dashed" else ""
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in s.points)
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.6"{dash}/>'
        )
    # legend, top-right inside the plot area
    for i, s in enumerate(spec.series):
        color = _PALETTE[i % len(_PALETTE)]
        dash = ' stroke-dasharray="7,4"' if s.style == "dashed" else ""
        y = mt + 16 + 16 * i
        out.append(
            f'<line x1="{ml + pw - 150}" y1="{y}" x2="{ml + pw - 122}" y2="{y}" '
            f'stroke="{color}" stroke-width="1.6"{dash}/>'
        )
        out.append(
            f'<text x="{ml + pw - 116}" y="{y + 4}" font-family="sans-serif" '
            f'font-size="11">{s.label}</text>'
        )
    out.append("</svg>")
    with open(spec.output_path, "w") as handle:
        handle.write("\n".join(out))
        handle.write("\n")
