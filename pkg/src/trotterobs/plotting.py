"""Static SVG charts for annealing curves and r* comparisons.

Only svg, g, path, polyline, text and line elements are emitted.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Callable, Sequence
from xml.sax.saxutils import escape

from .harness import read_csv

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 150, 30, 55
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

Series = tuple[str, list[tuple[float, float]]]


def num(x: float) -> str:
    """Shortest round-trip text for a tick or data label."""
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def _linear_ticks(lo: float, hi: float) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step)
    return [round(k * step, 12) for k in range(first, math.floor(hi / step) + 1)]


def _log_ticks(lo: float, hi: float) -> list[float]:
    ticks = [10.0**k for k in range(math.ceil(math.log10(lo) - 1e-12), math.floor(math.log10(hi) + 1e-12) + 1)]
    return ticks if len(ticks) >= 2 else sorted({lo, *ticks, hi})


def _scale(lo: float, hi: float, a: float, b: float, log: bool) -> Callable[[float], float]:
    f = math.log10 if log else (lambda v: v)
    flo, fhi = f(lo), f(hi)
    span = fhi - flo or 1.0
    return lambda v: a + (f(v) - flo) / span * (b - a)


def _padded(vals: Sequence[float], log: bool) -> tuple[float, float]:
    lo, hi = min(vals), max(vals)
    if log:
        return (lo / 1.5, hi * 1.5) if lo == hi else (lo, hi)
    if lo == hi:
        return lo - 1.0, hi + 1.0
    return lo, hi


def render_svg(series: Sequence[Series], *, title: str, xlabel: str, ylabel: str, logx=False, logy=False) -> str:
    x0, x1 = LEFT, WIDTH - RIGHT
    y0, y1 = HEIGHT - BOTTOM, TOP
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>',
        '<g id="axes" stroke="#000" fill="none">',
        f'<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}"/>',
    ]
    pts = [p for _, s in series for p in s if (not logx or p[0] > 0) and (not logy or p[1] > 0)]
    labels = [
        f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>',
    ]
    if not pts:
        out.append("</g>")
        out.extend(labels)
        out.append(f'<text x="{(x0 + x1) / 2}" y="{(y0 + y1) / 2}" text-anchor="middle">no data</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    xlo, xhi = _padded([p[0] for p in pts], logx)
    ylo, yhi = _padded([p[1] for p in pts], logy)
    sx = _scale(xlo, xhi, x0, x1, logx)
    sy = _scale(ylo, yhi, y0, y1, logy)
    for v in (_log_ticks if logx else _linear_ticks)(xlo, xhi):
        px = sx(v)
        out.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}"/>')
        out.append(f'<text x="{px:.2f}" y="{y0 + 18}" text-anchor="middle" stroke="none" fill="#000">{num(v)}</text>')
    for v in (_log_ticks if logy else _linear_ticks)(ylo, yhi):
        py = sy(v)
        out.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}"/>')
        out.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end" stroke="none" fill="#000">{num(v)}</text>')
    out.append("</g>")
    out.extend(labels)

    out.append('<g id="series" fill="none" stroke-width="1.5">')
    legend = ['<g id="legend">']
    for i, (name, s) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        keep = [p for p in s if (not logx or p[0] > 0) and (not logy or p[1] > 0)]
        if keep:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in keep)
            out.append(f'<polyline stroke="{color}" points="{coords}"/>')
        ly = TOP + 16 * i + 8
        legend.append(f'<line x1="{x1 + 12}" y1="{ly}" x2="{x1 + 36}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        legend.append(f'<text x="{x1 + 42}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</g>")
    out.extend(legend)
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _require(rows: list[dict[str, str]], cols: Sequence[str], path: str | Path) -> None:
    if rows and any(c not in rows[0] for c in cols):
        raise ValueError(f"{path}: missing column(s) {[c for c in cols if c not in rows[0]]}")


def _float(text: str, path: str | Path) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ValueError(f"{path}: bad number {text!r}") from None


def anneal_series(path: str | Path) -> list[Series]:
    rows = read_csv(path)
    if rows and "mean_cost" in rows[0]:
        _require(rows, ["iter", "mean_cost", "mean_best"], path)
        cur = [(_float(r["iter"], path), _float(r["mean_cost"], path)) for r in rows]
        best = [(_float(r["iter"], path), _float(r["mean_best"], path)) for r in rows]
        return [("mean cost", cur), ("mean best", best)]
    _require(rows, ["iter", "cost"], path)
    return [("cost", [(_float(r["iter"], path), _float(r["cost"], path)) for r in rows])]


def compare_series(path: str | Path) -> list[Series]:
    rows = read_csv(path)
    _require(rows, ["n", "family", "r_star"], path)
    by_family: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        pts = by_family.setdefault(r["family"], [])
        if r["r_star"]:
            pts.append((_float(r["n"], path), _float(r["r_star"], path)))
    return [(fam, sorted(pts)) for fam, pts in by_family.items()]


def emit_plot(csv_path: str | Path, kind: str, out_path: str | Path | None = None) -> str:
    if kind == "anneal":
        svg = render_svg(anneal_series(csv_path), title="Observation cost during annealing",
                         xlabel="iteration", ylabel="cost")
    elif kind == "compare":
        svg = render_svg(compare_series(csv_path), title="Trotter number by error metric",
                         xlabel="n", ylabel="r*", logx=True, logy=True)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    if out_path is not None:
        Path(out_path).write_bytes(svg.encode("utf-8"))
    return svg
