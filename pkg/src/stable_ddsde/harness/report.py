"""Aggregate run records into a CSV summary and SVG line plots.

The SVG files are written directly as text so reports need no plotting
stack; every coordinate is formatted with a fixed precision, which keeps
re-rendered artifacts byte-identical for identical inputs.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

from stable_ddsde.errors import ConfigError

_WIDTH, _HEIGHT = 640, 440
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 40, 50
_PLOT_W = _WIDTH - _MARGIN_L - _MARGIN_R
_PLOT_H = _HEIGHT - _MARGIN_T - _MARGIN_B


def _f(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0 ** e for e in range(int(lo_e), int(hi_e) + 1)]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / 4)) if span > 0 else 1.0
    if span / step > 8:
        step *= 2
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * max(1.0, abs(hi)):
        out.append(t)
        t += step
    return out


class _Plot:
    """Minimal line plot; optionally log-log with a fitted slope label."""

    def __init__(self, title: str, x_label: str, y_label: str, loglog: bool) -> None:
        self.title = title
        self.x_label = x_label
        self.y_label = y_label
        self.loglog = loglog
        self.series: list[tuple[str, list[tuple[float, float]]]] = []

    def add(self, name: str, points) -> None:
        pts = [(float(x), float(y)) for x, y in points]
        if self.loglog:
            pts = [(x, y) for x, y in pts if x > 0 and y > 0]
        if len(pts) >= 2:
            self.series.append((name, sorted(pts)))

    def _map(self, x, y, xlo, xhi, ylo, yhi):
        tx = lambda v: (math.log10(v) if self.loglog else v)
        fx = (tx(x) - tx(xlo)) / (tx(xhi) - tx(xlo)) if tx(xhi) > tx(xlo) else 0.5
        fy = (tx(y) - tx(ylo)) / (tx(yhi) - tx(ylo)) if tx(yhi) > tx(ylo) else 0.5
        return _MARGIN_L + fx * _PLOT_W, _MARGIN_T + (1.0 - fy) * _PLOT_H

    def render(self) -> str:
        xs = [x for _, pts in self.series for x, _ in pts]
        ys = [y for _, pts in self.series for _, y in pts]
        xlo, xhi = min(xs), max(xs)
        ylo, yhi = min(ys), max(ys)
        if xlo == xhi:
            xlo, xhi = xlo * 0.9 if xlo else -1.0, xhi * 1.1 if xhi else 1.0
        if ylo == yhi:
            ylo, yhi = ylo * 0.9 if ylo else -1.0, yhi * 1.1 if yhi else 1.0
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
            f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
            f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
            f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" '
            f'font-family="monospace" font-size="15">{self.title}</text>',
            f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{_PLOT_W}" '
            f'height="{_PLOT_H}" fill="none" stroke="black"/>',
        ]
        for tick in _ticks(xlo, xhi, self.loglog):
            if not xlo <= tick <= xhi:
                continue
            px, _ = self._map(tick, ylo, xlo, xhi, ylo, yhi)
            label = f"{tick:g}"
            parts.append(f'<line x1="{_f(px)}" y1="{_MARGIN_T + _PLOT_H}" '
                         f'x2="{_f(px)}" y2="{_MARGIN_T + _PLOT_H + 5}" stroke="black"/>')
            parts.append(f'<text x="{_f(px)}" y="{_MARGIN_T + _PLOT_H + 20}" '
                         f'text-anchor="middle" font-family="monospace" '
                         f'font-size="11">{label}</text>')
        for tick in _ticks(ylo, yhi, self.loglog):
            if not ylo <= tick <= yhi:
                continue
            _, py = self._map(xlo, tick, xlo, xhi, ylo, yhi)
            parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{_f(py)}" '
                         f'x2="{_MARGIN_L}" y2="{_f(py)}" stroke="black"/>')
            parts.append(f'<text x="{_MARGIN_L - 8}" y="{_f(py + 4)}" '
                         f'text-anchor="end" font-family="monospace" '
                         f'font-size="11">{tick:g}</text>')
        parts.append(f'<text x="{_MARGIN_L + _PLOT_W // 2}" y="{_HEIGHT - 12}" '
                     f'text-anchor="middle" font-family="monospace" '
                     f'font-size="12">{self.x_label}</text>')
        parts.append(f'<text x="16" y="{_MARGIN_T + _PLOT_H // 2}" '
                     f'text-anchor="middle" font-family="monospace" font-size="12" '
                     f'transform="rotate(-90 16 {_MARGIN_T + _PLOT_H // 2})">'
                     f'{self.y_label}</text>')
        colors = ("#1f5fa8", "#b03a2e", "#1e8449", "#7d3c98", "#b7950b")
        for i, (name, pts) in enumerate(self.series):
            color = colors[i % len(colors)]
            coords = " ".join(
                f"{_f(px)},{_f(py)}"
                for px, py in (self._map(x, y, xlo, xhi, ylo, yhi) for x, y in pts)
            )
            parts.append(f'<polyline points="{coords}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"/>')
            for x, y in pts:
                px, py = self._map(x, y, xlo, xhi, ylo, yhi)
                parts.append(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="2.5" '
                             f'fill="{color}"/>')
            parts.append(f'<text x="{_MARGIN_L + 8}" y="{_MARGIN_T + 16 + 14 * i}" '
                         f'font-family="monospace" font-size="11" '
                         f'fill="{color}">{name}</text>')
        if self.loglog and self.series:
            slope = _fit_slope(self.series[0][1])
            parts.append(f'<text x="{_WIDTH - _MARGIN_R - 8}" y="{_MARGIN_T + 16}" '
                         f'text-anchor="end" font-family="monospace" font-size="12">'
                         f'fitted slope {slope:.3f}</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def _fit_slope(points) -> float:
    lx = [math.log10(x) for x, _ in points]
    ly = [math.log10(y) for _, y in points]
    n = len(points)
    mx, my = sum(lx) / n, sum(ly) / n
    denom = sum((v - mx) ** 2 for v in lx)
    if denom == 0.0:
        return 0.0
    return sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / denom


def _load_records(run_dirs):
    records, skipped = [], []
    for run in run_dirs:
        path = Path(run) / "run-manifest.json"
        if not path.is_file():
            skipped.append(str(run))
            print(f"stable-ddsde: skipping {run}: no run manifest", file=sys.stderr)
            continue
        records.append((str(run), json.loads(path.read_text(encoding="utf-8"))))
    return records, skipped


def render_report(run_dirs, out: Path) -> tuple[list[Path], list[str]]:
    """Summarize run records; returns (written files, skipped dirs)."""
    records, skipped = _load_records(run_dirs)
    if not records:
        raise ConfigError([("report.runs", "no runs found")])
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    keys = sorted({
        k for _, rec in records
        for k, v in rec.get("metrics", {}).items()
        if isinstance(v, (int, float))
    })
    summary = out / "summary.csv"
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "kind", "seed", "status", *keys])
        for run, rec in records:
            metrics = rec.get("metrics", {})
            writer.writerow([
                run, rec.get("kind", ""), rec.get("seed", ""), rec.get("status", ""),
                *(f"{metrics[k]:.12g}" if isinstance(metrics.get(k), (int, float))
                  else "" for k in keys),
            ])
    written.append(summary)

    error_plot = _Plot("L1 error against the reference solve", "n_steps",
                       "e(T)", loglog=True)
    for run, rec in records:
        m = rec.get("metrics", {})
        if rec.get("kind") == "convergence" and "e_final" in m:
            error_plot.add(Path(run).name, zip(m["n_steps"], m["e_final"]))
    if error_plot.series:
        path = out / "l1_error_vs_steps.svg"
        path.write_text(error_plot.render(), encoding="utf-8")
        written.append(path)

    dom_points = [
        (rec["metrics"]["n_steps"], rec["metrics"]["domination_sup"])
        for _, rec in records
        if rec.get("kind") == "simulate-particles"
        and "domination_sup" in rec.get("metrics", {})
    ]
    dom_plot = _Plot("Domination constant across step counts", "n_steps",
                     "sup C(t)", loglog=False)
    dom_plot.add("runs", dom_points)
    if dom_plot.series:
        path = out / "domination_vs_steps.svg"
        path.write_text(dom_plot.render(), encoding="utf-8")
        written.append(path)

    decay_plot = _Plot("Block heat integrals", "2^j", "I_j", loglog=True)
    for run, rec in records:
        if rec.get("kind") == "verify-besov":
            integrals = rec.get("metrics", {}).get("lp_integrals", {})
            decay_plot.add(Path(run).name,
                           [(2.0 ** int(j), v) for j, v in sorted(integrals.items(), key=lambda kv: int(kv[0]))])
    if decay_plot.series:
        path = out / "block_decay.svg"
        path.write_text(decay_plot.render(), encoding="utf-8")
        written.append(path)

    return written, skipped
