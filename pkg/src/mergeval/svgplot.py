"""Minimal deterministic SVG renderer for precision-coverage curves.

No plotting dependency: the curves are polylines on a unit-square axis box,
which a few dozen lines of SVG cover. Output depends only on the input
curves, so repeated runs produce identical files.
"""

from __future__ import annotations

from .model import Curve

_WIDTH, _HEIGHT = 640.0, 480.0
_LEFT, _RIGHT, _TOP, _BOTTOM = 70.0, 620.0, 25.0, 430.0

_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f")


def _x(coverage: float) -> float:
    return _LEFT + coverage * (_RIGHT - _LEFT)


def _y(precision: float) -> float:
    return _BOTTOM - precision * (_BOTTOM - _TOP)


def render_curves_svg(curves: dict[str, Curve]) -> str:
    """Render named curves into one SVG document (insertion order = legend order)."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH:.0f}" '
        f'height="{_HEIGHT:.0f}" viewBox="0 0 {_WIDTH:.0f} {_HEIGHT:.0f}">',
        f'<rect x="0" y="0" width="{_WIDTH:.0f}" height="{_HEIGHT:.0f}" fill="white"/>',
    ]

    # grid and tick labels every 0.2
    for k in range(6):
        v = k / 5.0
        x, y = _x(v), _y(v)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_TOP:.2f}" x2="{x:.2f}" y2="{_BOTTOM:.2f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{_LEFT:.2f}" y1="{y:.2f}" x2="{_RIGHT:.2f}" y2="{y:.2f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_BOTTOM + 18:.2f}" font-size="12" '
            f'text-anchor="middle" font-family="sans-serif">{v:.1f}</text>'
        )
        parts.append(
            f'<text x="{_LEFT - 8:.2f}" y="{y + 4:.2f}" font-size="12" '
            f'text-anchor="end" font-family="sans-serif">{v:.1f}</text>'
        )

    # axis box and labels
    parts.append(
        f'<rect x="{_LEFT:.2f}" y="{_TOP:.2f}" width="{_RIGHT - _LEFT:.2f}" '
        f'height="{_BOTTOM - _TOP:.2f}" fill="none" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{(_LEFT + _RIGHT) / 2:.2f}" y="{_HEIGHT - 10:.2f}" font-size="14" '
        'text-anchor="middle" font-family="sans-serif">coverage</text>'
    )
    parts.append(
        f'<text x="16" y="{(_TOP + _BOTTOM) / 2:.2f}" font-size="14" '
        f'text-anchor="middle" font-family="sans-serif" '
        f'transform="rotate(-90 16 {(_TOP + _BOTTOM) / 2:.2f})">precision</text>'
    )

    for idx, (name, curve) in enumerate(curves.items()):
        color = _COLORS[idx % len(_COLORS)]
        coords = " ".join(
            f"{_x(p.coverage):.2f},{_y(p.precision):.2f}" for p in curve.points
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        # legend entry, top-right inside the axis box
        ly = _TOP + 16 + 18 * idx
        parts.append(
            f'<line x1="{_RIGHT - 150:.2f}" y1="{ly:.2f}" x2="{_RIGHT - 126:.2f}" '
            f'y2="{ly:.2f}" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_RIGHT - 120:.2f}" y="{ly + 4:.2f}" font-size="12" '
            f'font-family="sans-serif">{name} (AUC={curve.auc:.3f})</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
