"""Deterministic CSV emission and a dependency-free SVG line plotter.

Floats are printed in scientific notation with 17 significant digits, which
round-trips IEEE doubles bit-exactly.  Identical data produce byte-identical
files; anything wall-clock-related belongs in the sidecar log, not here.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

__all__ = ["format_value", "write_csv", "read_csv", "write_svg_lines"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.16e}"
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path) -> Tuple[List[str], List[List]]:
    """Read back a CSV written by :func:`write_csv`; numeric fields become
    floats (ints stay ints), everything else stays a string."""
    text = Path(path).read_text().strip("\n")
    lines = text.split("\n")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        row = []
        for field in line.split(","):
            try:
                row.append(int(field))
            except ValueError:
                try:
                    row.append(float(field))
                except ValueError:
                    row.append(field)
        rows.append(row)
    return header, rows


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo: float, hi: float, count: int = 5) -> List[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def write_svg_lines(path, series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
                    title: str = "", xlabel: str = "", ylabel: str = "",
                    logx: bool = False, logy: bool = False) -> None:
    """Plot (label, xs, ys) polylines into a standalone SVG file.

    Log axes drop non-positive points.  This is a convenience artifact; all
    quantitative output lives in the CSVs.
    """
    cleaned = []
    for label, xs, ys in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if (not logx or x > 0) and (not logy or y > 0)]
        if pts:
            cleaned.append((label, pts))
    if not cleaned:
        Path(path).write_text('<svg xmlns="http://www.w3.org/2000/svg"/>\n')
        return

    def tx(v): return math.log10(v) if logx else v
    def ty(v): return math.log10(v) if logy else v

    all_x = [tx(x) for _, pts in cleaned for x, _ in pts]
    all_y = [ty(y) for _, pts in cleaned for _, y in pts]
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_y), max(all_y)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v): return _ML + (tx(v) - x0) / (x1 - x0) * (_W - _ML - _MR)
    def py(v): return _H - _MB - (ty(v) - y0) / (y1 - y0) * (_H - _MT - _MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>']
    # frame and ticks
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
               f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        xpix = _ML + (t - x0) / (x1 - x0) * (_W - _ML - _MR)
        label = f"1e{t:.1f}" if logx else f"{t:.3g}"
        out.append(f'<line x1="{xpix:.1f}" y1="{_H - _MB}" x2="{xpix:.1f}" '
                   f'y2="{_H - _MB + 5}" stroke="black"/>')
        out.append(f'<text x="{xpix:.1f}" y="{_H - _MB + 18}" '
                   f'text-anchor="middle">{label}</text>')
    for t in _ticks(y0, y1):
        ypix = _H - _MB - (t - y0) / (y1 - y0) * (_H - _MT - _MB)
        label = f"1e{t:.1f}" if logy else f"{t:.3g}"
        out.append(f'<line x1="{_ML - 5}" y1="{ypix:.1f}" x2="{_ML}" '
                   f'y2="{ypix:.1f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{ypix + 4:.1f}" '
                   f'text-anchor="end">{label}</text>')
    if title:
        out.append(f'<text x="{_W / 2}" y="18" text-anchor="middle" '
                   f'font-size="14">{title}</text>')
    if xlabel:
        out.append(f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{_H / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text>')
    for i, (label, pts) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        out.append(f'<text x="{_W - _MR - 8}" y="{_MT + 16 + 14 * i}" '
                   f'text-anchor="end" fill="{color}">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
