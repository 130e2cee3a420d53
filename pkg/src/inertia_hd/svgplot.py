"""Minimal native SVG emitter for log-log benchmark panels."""

import math

import numpy as np

__all__ = ["loglog_panel"]

PALETTE = ("#1f6f8b", "#d1495b", "#66a182", "#8d6a9f", "#edae49", "#2e4057")

_W, _H = 640, 460
_ML, _MR, _MT, _MB = 74, 24, 36, 54


def _finite_positive(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    return x[m], y[m]


def loglog_panel(curves, title: str, xlabel: str, ylabel: str) -> str:
    """Render [(label, x, y), ...] as one log-log SVG panel (a string).

    Non-finite and non-positive samples are dropped per curve; curves with
    nothing left are listed in the legend but draw no line.
    """
    cleaned = [(label, *_finite_positive(x, y)) for label, x, y in curves]
    xs = [x for _, x, _ in cleaned if x.size]
    ys = [y for _, _, y in cleaned if y.size]
    if xs:
        x_lo = math.floor(math.log10(min(float(x.min()) for x in xs)))
        x_hi = math.ceil(math.log10(max(float(x.max()) for x in xs)))
        y_lo = math.floor(math.log10(min(float(y.min()) for y in ys)))
        y_hi = math.ceil(math.log10(max(float(y.max()) for y in ys)))
    else:  # nothing to draw; keep a unit box
        x_lo, x_hi, y_lo, y_hi = 0, 1, 0, 1
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(lx):
        return _ML + (lx - x_lo) / (x_hi - x_lo) * plot_w

    def py(ly):
        return _MT + (y_hi - ly) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]

    # decade grid + tick labels
    x_step = max(1, (x_hi - x_lo) // 8 + 1)
    y_step = max(1, (y_hi - y_lo) // 8 + 1)
    for e in range(x_lo, x_hi + 1, x_step):
        X = px(e)
        out.append(
            f'<line x1="{X:.2f}" y1="{_MT}" x2="{X:.2f}" y2="{_H - _MB}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{X:.2f}" y="{_H - _MB + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">1e{e}</text>'
        )
    for e in range(y_lo, y_hi + 1, y_step):
        Y = py(e)
        out.append(
            f'<line x1="{_ML}" y1="{Y:.2f}" x2="{_W - _MR}" y2="{Y:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_ML - 6}" y="{Y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">1e{e}</text>'
        )

    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{_ML + plot_w / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{_MT + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {_MT + plot_h / 2:.1f})">{ylabel}</text>'
    )

    for i, (label, x, y) in enumerate(cleaned):
        color = PALETTE[i % len(PALETTE)]
        if x.size:
            pts = " ".join(
                f"{px(math.log10(float(a))):.2f},{py(math.log10(float(b))):.2f}"
                for a, b in zip(x, y)
            )
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
        ly = _MT + 16 + 16 * i
        lx = _W - _MR - 150
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
