"""Static SVG drawing of a solved tree (first two coordinates)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import IoError

MARGIN = 0.05


def render_svg(tree, size: float = 480.0) -> str:
    n = tree.n
    k = tree.steiner_count
    xy = tree.pos[:n + k, :2]
    lo = tree.points[:, :2].min(axis=0)
    hi = tree.points[:, :2].max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    lo = lo - MARGIN * span
    span = span * (1 + 2 * MARGIN)
    scale = size / span.max()
    w, h = span * scale

    def px(p):
        # flip y so the picture has the usual orientation
        return (p[0] - lo[0]) * scale, h - (p[1] - lo[1]) * scale

    r = max(2.0, size / 120)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" '
           f'viewBox="0 0 {w:.3f} {h:.3f}">']
    for p, q in sorted(tree.edges.values()):
        (x1, y1), (x2, y2) = px(xy[p]), px(xy[q])
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                   'stroke="black" stroke-width="1"/>')
    for g in range(n):
        x, y = px(xy[g])
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{r:.2f}" fill="black"/>')
    for g in range(n, n + k):
        x, y = px(xy[g])
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{r:.2f}" fill="white" '
                   'stroke="black" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(tree, path) -> None:
    try:
        Path(path).write_text(render_svg(tree))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
