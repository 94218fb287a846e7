"""Minimal self-contained SVG line charts (CSV stays the authoritative output)."""

import math

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2")

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 34, 50


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (1 * mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * step:
        out.append(t)
        t += step
    return out


def line_chart(path, series, title: str = "", xlabel: str = "",
               ylabel: str = "", logy: bool = False) -> None:
    """Write a polyline chart; series is a list of (label, x, y)."""
    cleaned = []
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logy:
            keep &= y > 0
        x, y = x[keep], y[keep]
        if logy:
            y = np.log10(y)
        if len(x):
            cleaned.append((label, x, y))
    if not cleaned:
        cleaned = [("empty", np.array([0.0, 1.0]), np.array([0.0, 0.0]))]
    xlo = min(float(x.min()) for _, x, _ in cleaned)
    xhi = max(float(x.max()) for _, x, _ in cleaned)
    ylo = min(float(y.min()) for _, _, y in cleaned)
    yhi = max(float(y.max()) for _, _, y in cleaned)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def px(v):
        return _ML + (v - xlo) / (xhi - xlo) * pw

    def py(v):
        return _MT + ph - (v - ylo) / (yhi - ylo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" '
        f'font-size="14">{title}</text>',
    ]
    for t in _ticks(xlo, xhi):
        xp = px(t)
        parts.append(
            f'<line x1="{xp:.1f}" y1="{_MT + ph}" x2="{xp:.1f}" '
            f'y2="{_MT + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{xp:.1f}" y="{_MT + ph + 18}" '
            f'text-anchor="middle">{t:.5g}</text>'
        )
    for t in _ticks(ylo, yhi):
        yp = py(t)
        label = f"1e{t:.3g}" if logy else f"{t:.5g}"
        parts.append(
            f'<line x1="{_ML - 5}" y1="{yp:.1f}" x2="{_ML}" y2="{yp:.1f}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{yp + 4:.1f}" text-anchor="end">{label}</text>'
        )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        'stroke="black"/>'
    )
    parts.append(
        f'<text x="{_ML + pw / 2:.0f}" y="{_H - 12}" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MT + ph / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_MT + ph / 2:.0f})">'
        f'{"log10 " + ylabel if logy else ylabel}</text>'
    )
    for i, (label, x, y) in enumerate(cleaned):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 6}" y="{_MT + 16 + 16 * i}" text-anchor="end" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
