"""Deterministic log-log SVG of an error curve.

Hand-written SVG keeps output byte-stable across runs and library
versions. Fixed 800x600 canvas; points for every nonzero error, a fitted
line over the above-floor points when a fit exists, and the region below
the accuracy floor shaded.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

import numpy as np

from .rates import ErrorCurve, fit_order

__all__ = ["WIDTH", "HEIGHT", "emit_plot"]

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 90, 30, 30, 70


def _decade_range(values: np.ndarray) -> tuple[float, float]:
    lo = math.floor(float(np.log10(values.min())))
    hi = math.ceil(float(np.log10(values.max())))
    if hi == lo:
        lo, hi = lo - 1, hi + 1
    return lo, hi


def emit_plot(curve: ErrorCurve, path: Optional[str | Path] = None) -> str:
    """Render ``curve`` to SVG text, writing it to ``path`` when given."""
    if curve.ns.size == 0:
        raise ValueError("cannot plot an empty curve")
    ns = curve.ns.astype(float)
    errors = curve.errors
    floor = curve.floor
    positive = errors > 0
    shown = np.where(positive, errors, floor)

    x_lo, x_hi = _decade_range(ns)
    y_lo, y_hi = _decade_range(np.append(shown, floor))
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    x_px = plot_w / (x_hi - x_lo)
    y_px = plot_h / (y_hi - y_lo)

    def px(n: float) -> float:
        return MARGIN_LEFT + (math.log10(n) - x_lo) * x_px

    def py(e: float) -> float:
        return MARGIN_TOP + (y_hi - math.log10(e)) * y_px

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" data-x-decade-px="{x_px:.6f}" '
        f'data-y-decade-px="{y_px:.6f}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]

    floor_y = py(floor)
    bottom = MARGIN_TOP + plot_h
    if floor_y < bottom:
        out.append(
            f'<rect class="floor" x="{MARGIN_LEFT}" y="{floor_y:.3f}" width="{plot_w}" '
            f'height="{bottom - floor_y:.3f}" fill="#dddddd"/>'
        )

    out.append(
        f'<rect class="frame" x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black"/>'
    )
    for k in range(int(x_lo), int(x_hi) + 1):
        x = px(10.0**k)
        out.append(f'<line x1="{x:.3f}" y1="{bottom}" x2="{x:.3f}" y2="{bottom + 6}" stroke="black"/>')
        out.append(f'<text x="{x:.3f}" y="{bottom + 22}" text-anchor="middle" font-size="14">1e{k}</text>')
    for k in range(int(y_lo), int(y_hi) + 1):
        y = py(10.0**k)
        out.append(f'<line x1="{MARGIN_LEFT - 6}" y1="{y:.3f}" x2="{MARGIN_LEFT}" y2="{y:.3f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_LEFT - 10}" y="{y + 5:.3f}" text-anchor="end" font-size="14">1e{k}</text>')
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 20}" text-anchor="middle" font-size="16">n</text>'
    )
    out.append(
        f'<text x="24" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" font-size="16" '
        f'transform="rotate(-90 24 {MARGIN_TOP + plot_h / 2:.1f})">error ({curve.norm_kind})</text>'
    )

    report = fit_order(curve)
    if np.isfinite(report.fitted_order):
        used = curve.ns[curve.above_floor].astype(float)
        n0, n1 = float(used.min()), float(used.max())
        e0 = math.exp(report.intercept) * n0 ** (-report.fitted_order)
        e1 = math.exp(report.intercept) * n1 ** (-report.fitted_order)
        out.append(
            f'<line class="fit" x1="{px(n0):.3f}" y1="{py(e0):.3f}" x2="{px(n1):.3f}" '
            f'y2="{py(e1):.3f}" stroke="#c0392b" stroke-width="2" '
            f'data-order="{report.fitted_order:.6f}"/>'
        )

    for n, e, ok in zip(ns, shown, positive):
        if ok:
            out.append(
                f'<circle class="point" cx="{px(n):.3f}" cy="{py(e):.3f}" r="4" '
                f'fill="#1f4e9c" data-n="{int(n)}" data-error="{e:.6e}"/>'
            )
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
