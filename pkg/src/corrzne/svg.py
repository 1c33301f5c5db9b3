"""Minimal deterministic SVG line plots (polylines, axes, legend)."""
import math

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = (70, 20, 30, 50)  # left, right, top, bottom
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 6)
        return [float(k) for k in range(a, b + 1, step)]
    return [float(t) for t in np.linspace(lo, hi, 5)]


def _tick_label(v, log):
    return f"1e{int(v)}" if log else f"{v:.3g}"


def line_plot(series, title="", xlabel="", ylabel="", logx=False, logy=False, markers=()):
    """Render ``series = [(label, x, y), ...]`` to an SVG string.

    ``markers`` holds ``(label, x, y)`` points drawn as stars.  Non-positive
    values are dropped on log axes and non-finite values everywhere.
    """
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def tx(v, log):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log10(v) if log else v

    clean = []
    for label, x, y in series:
        xs, ys = tx(x, logx), tx(y, logy)
        ok = np.isfinite(xs) & np.isfinite(ys)
        clean.append((label, xs[ok], ys[ok]))
    pts = [(tx([x], logx)[0], tx([y], logy)[0], label) for label, x, y in markers]
    pts = [p for p in pts if np.isfinite(p[0]) and np.isfinite(p[1])]
    allx = np.concatenate([c[1] for c in clean] + [np.array([p[0] for p in pts])])
    ally = np.concatenate([c[2] for c in clean] + [np.array([p[1] for p in pts])])
    if allx.size == 0:
        allx, ally = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1, logx):
        if x0 <= t <= x1:
            out.append(f'<line x1="{_fmt(px(t))}" y1="{top + ph}" x2="{_fmt(px(t))}" '
                       f'y2="{top + ph + 4}" stroke="black"/>')
            out.append(f'<text x="{_fmt(px(t))}" y="{top + ph + 16}" text-anchor="middle">'
                       f'{_tick_label(t, logx)}</text>')
    for t in _ticks(y0, y1, logy):
        if y0 <= t <= y1:
            out.append(f'<line x1="{left - 4}" y1="{_fmt(py(t))}" x2="{left}" '
                       f'y2="{_fmt(py(t))}" stroke="black"/>')
            out.append(f'<text x="{left - 6}" y="{_fmt(py(t) + 4)}" text-anchor="end">'
                       f'{_tick_label(t, logy)}</text>')
    for k, (label, xs, ys) in enumerate(clean):
        color = COLORS[k % len(COLORS)]
        path = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        ly = top + 14 + 14 * k
        out.append(f'<line x1="{left + pw - 150}" y1="{ly - 4}" x2="{left + pw - 130}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 125}" y="{ly}">{label}</text>')
    for k, (x, y, label) in enumerate(pts):
        color = COLORS[k % len(COLORS)]
        out.append(f'<text x="{_fmt(px(x))}" y="{_fmt(py(y) + 5)}" fill="{color}" '
                   f'text-anchor="middle" font-size="16">*</text>')
    out.append(f'<text x="{left + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2})">{ylabel}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{top - 10}" text-anchor="middle">{title}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
