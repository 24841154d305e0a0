"""Hand-written SVG 1.1 charts: bar charts of probabilities and simple line plots.

Each chart names its source CSV in ``<desc>`` and tags every mark with the
exact CSV strings it was drawn from (``data-x``/``data-value``), so a figure
can be audited against its table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 480, 320
LEFT, RIGHT, TOP, BOTTOM = 56, 16, 36, 44


@dataclass(frozen=True)
class FigureSpec:
    kind: str  # site_bars | momentum_bars | survival_curve | scaling_loglog
    title: str
    xlabel: str
    ylabel: str
    data_ref: str


def _num(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _frame(spec: FigureSpec, body: list[str], y_ticks: list[tuple[float, str]], x_ticks) -> str:
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{escape(spec.title)}</title>",
        f"<desc>kind={spec.kind}; data={escape(spec.data_ref)}</desc>",
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13">{escape(spec.title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for frac, label in y_ticks:
        y = TOP + ph * (1 - frac)
        out.append(f'<line x1="{LEFT - 4}" y1="{_num(y)}" x2="{LEFT}" y2="{_num(y)}" stroke="black"/>')
        out.append(
            f'<text x="{LEFT - 6}" y="{_num(y + 4)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="10">{escape(label)}</text>'
        )
    for frac, label in x_ticks:
        x = LEFT + pw * frac
        out.append(
            f'<text x="{_num(x)}" y="{TOP + ph + 14}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="10">{escape(label)}</text>'
        )
    out.append(
        f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 8}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="11">{escape(spec.xlabel)}</text>'
    )
    out.append(
        f'<text x="14" y="{TOP + ph / 2}" text-anchor="middle" font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 14 {TOP + ph / 2})">{escape(spec.ylabel)}</text>'
    )
    out.extend(body)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_chart(spec: FigureSpec, labels: list[str], values: list[str], y_max: float | None = None) -> str:
    """Vertical bars; ``labels``/``values`` are the CSV strings of the x and y columns."""
    nums = [float(v) for v in values]
    top = y_max if y_max else max(max(nums), 1e-300)
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM
    slot = pw / max(len(nums), 1)
    bar = max(slot * 0.7, 0.5)
    body = []
    for i, (lab, raw, v) in enumerate(zip(labels, values, nums)):
        h = ph * min(v / top, 1.0)
        x = LEFT + i * slot + (slot - bar) / 2
        body.append(
            f'<rect x="{_num(x)}" y="{_num(TOP + ph - h)}" width="{_num(bar)}" height="{_num(h)}" '
            f'fill="#3465a4" data-x="{escape(lab)}" data-value="{escape(raw)}"/>'
        )
    step = max(1, len(labels) // 8)
    x_ticks = [((i + 0.5) / len(labels), labels[i]) for i in range(0, len(labels), step)]
    y_ticks = [(f, _num(f * top)) for f in (0.0, 0.5, 1.0)]
    return _frame(spec, body, y_ticks, x_ticks)


def line_chart(
    spec: FigureSpec,
    xs: list[str],
    ys: list[str],
    log: bool = False,
    fit: tuple[float, float] | None = None,
) -> str:
    """Polyline with point markers; ``log`` puts both axes on log10 scales.

    ``fit`` = (amplitude, exponent) overlays ``A x^p`` as a dashed line.
    """
    fx = [float(v) for v in xs]
    fy = [float(v) for v in ys]
    tx = [math.log10(v) for v in fx] if log else fx
    ty = [math.log10(v) if v > 0 else float("nan") for v in fy] if log else fy
    good = [(a, b) for a, b in zip(tx, ty) if math.isfinite(b)]
    x0, x1 = min(a for a, _ in good), max(a for a, _ in good)
    y0, y1 = min(b for _, b in good), max(b for _, b in good)
    if not log:
        y0 = min(y0, 0.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM

    def px(a):
        return LEFT + pw * (a - x0) / (x1 - x0)

    def py(b):
        return TOP + ph * (1 - (b - y0) / (y1 - y0))

    pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(tx, ty) if math.isfinite(b))
    body = [f'<polyline points="{pts}" fill="none" stroke="#3465a4" stroke-width="1.5"/>']
    if fit is not None:
        amp, expo = fit
        fa = [x0, x1]
        fb = [math.log10(amp) + expo * a for a in fa] if log else [amp * a**expo for a in fa]
        body.append(
            f'<line x1="{_num(px(fa[0]))}" y1="{_num(py(fb[0]))}" x2="{_num(px(fa[1]))}" '
            f'y2="{_num(py(fb[1]))}" stroke="#cc0000" stroke-dasharray="4 3"/>'
        )
    if len(xs) <= 64:
        for raw_x, raw_y, a, b in zip(xs, ys, tx, ty):
            if math.isfinite(b):
                body.append(
                    f'<circle cx="{_num(px(a))}" cy="{_num(py(b))}" r="2.5" fill="#3465a4" '
                    f'data-x="{escape(raw_x)}" data-value="{escape(raw_y)}"/>'
                )
    lab = (lambda v: _num(10**v)) if log else _num
    y_ticks = [(f, lab(y0 + f * (y1 - y0))) for f in (0.0, 0.5, 1.0)]
    x_ticks = [(f, lab(x0 + f * (x1 - x0))) for f in (0.0, 0.5, 1.0)]
    return _frame(spec, body, y_ticks, x_ticks)
