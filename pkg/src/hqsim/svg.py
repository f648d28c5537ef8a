"""Bare-bones SVG line plots and heatmaps for quick looks at CSV outputs."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _scale(lo, hi, a, b):
    span = (hi - lo) or 1.0
    return lambda v: a + (np.asarray(v, float) - lo) / span * (b - a)


def _frame(title, xlabel, ylabel, xlim, ylim):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{W / 2}" y="18" text-anchor="middle">{escape(title)}</text>',
           f'<rect x="{LEFT}" y="{TOP}" width="{W - LEFT - RIGHT}" height="{H - TOP - BOTTOM}" '
           'fill="none" stroke="black"/>',
           f'<text x="{(LEFT + W - RIGHT) / 2}" y="{H - 10}" text-anchor="middle">'
           f'{escape(xlabel)}</text>',
           f'<text x="15" y="{(TOP + H - BOTTOM) / 2}" text-anchor="middle" '
           f'transform="rotate(-90 15 {(TOP + H - BOTTOM) / 2})">{escape(ylabel)}</text>']
    sx = _scale(*xlim, LEFT, W - RIGHT)
    sy = _scale(*ylim, H - BOTTOM, TOP)
    for v in np.linspace(*xlim, 5):
        out.append(f'<text x="{sx(v):.1f}" y="{H - BOTTOM + 15}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(*ylim, 5):
        out.append(f'<text x="{LEFT - 5}" y="{sy(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    return out, sx, sy


def _limits(arrays):
    vals = np.concatenate([np.ravel(a) for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    return (lo - 0.5, hi + 0.5) if lo == hi else (lo, hi)


def line_plot(path, series, *, title="", xlabel="", ylabel="") -> None:
    """``series``: list of (label, x, y)."""
    xlim = _limits([s[1] for s in series])
    ylim = _limits([s[2] for s in series])
    out, sx, sy = _frame(title, xlabel, ylabel, xlim, ylim)
    for k, (label, x, y) in enumerate(series):
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(x[ok]), sy(y[ok])))
        c = COLORS[k % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{W - RIGHT - 5}" y="{TOP + 15 * (k + 1)}" text-anchor="end" '
                   f'fill="{c}">{escape(str(label))}</text>')
    _write(path, out)


def heatmap(path, x, y, z, *, title="", xlabel="", ylabel="") -> None:
    """``z[i, j]`` at (x[i], y[j]), grey scale from min (black) to max (white)."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    out, sx, sy = _frame(title, xlabel, ylabel, _limits([x]), _limits([y]))
    lo, hi = _limits([z])
    xe = _edges(x)
    ye = _edges(y)
    for i in range(x.size):
        x0, x1 = sx(xe[i]), sx(xe[i + 1])
        for j in range(y.size):
            y0, y1 = sy(ye[j + 1]), sy(ye[j])
            g = int(round(255 * (z[i, j] - lo) / (hi - lo))) if np.isfinite(z[i, j]) else 0
            out.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0 + 0.3:.2f}" '
                       f'height="{y1 - y0 + 0.3:.2f}" fill="rgb({g},{g},{g})"/>')
    _write(path, out)


def _edges(v):
    if v.size == 1:
        return np.array([v[0] - 0.5, v[0] + 0.5])
    mid = 0.5 * (v[1:] + v[:-1])
    return np.concatenate([[v[0] - (mid[0] - v[0])], mid, [v[-1] + (v[-1] - mid[-1])]])


def _write(path, parts) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(parts + ["</svg>"]) + "\n")
