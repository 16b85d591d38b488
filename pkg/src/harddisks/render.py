"""Point-set output formats: SVG rendering, CSV and JSON serialisation.

CSV carries one point per row under a ``x0,...,x{d-1}`` header, printed with
17 significant digits so parse(emit(P)) reproduces P bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .geometry import as_point_array


def render_svg(points, radius: float, canvas_px: int = 1000) -> str:
    """SVG document for a two-dimensional configuration.

    The unit square maps to a canvas_px x canvas_px viewport with the
    mathematical orientation (origin bottom-left, y grows upward); one circle
    of radius r * canvas_px per point.  Disks may overhang the square and are
    clipped by the viewport, matching the model's boundary convention.
    """
    pts = as_point_array(points)
    if pts.shape[0] and pts.shape[1] != 2:
        raise ValueError(f"SVG rendering requires dimension 2, got {pts.shape[1]}")
    if canvas_px < 1:
        raise ValueError("canvas_px must be positive")
    scale = float(canvas_px)
    rpx = radius * scale
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas_px}" height="{canvas_px}" '
        f'viewBox="0 0 {canvas_px} {canvas_px}">',
        "<!-- unit square in mathematical orientation: origin bottom-left, y up -->",
        f'<rect x="0" y="0" width="{canvas_px}" height="{canvas_px}" '
        'fill="white" stroke="black" stroke-width="1"/>',
    ]
    for x, y in pts:
        cx = x * scale
        cy = scale - y * scale
        lines.append(
            f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{rpx:.3f}" '
            'fill="steelblue" fill-opacity="0.7" stroke="black" stroke-width="0.5"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def points_to_csv(points) -> str:
    """CSV text with header x0..x{d-1} and full round-trip precision."""
    pts = as_point_array(points)
    header = ",".join(f"x{k}" for k in range(pts.shape[1]))
    rows = [header]
    for row in pts:
        rows.append(",".join(f"{float(v):.17g}" for v in row))
    return "\n".join(rows) + "\n"


def points_from_csv(text: str) -> np.ndarray:
    """Inverse of points_to_csv; bit-exact round trip."""
    lines = [line for line in text.strip().splitlines() if line]
    if not lines:
        raise ValueError("empty CSV")
    header = lines[0].split(",")
    dim = len(header)
    if header != [f"x{k}" for k in range(dim)]:
        raise ValueError(f"unexpected CSV header: {lines[0]!r}")
    data = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return np.asarray(data, dtype=np.float64).reshape(len(data), dim)


def points_to_json(points, params=None) -> str:
    """JSON document with the configuration and, optionally, its parameters."""
    pts = as_point_array(points)
    doc: dict = {"count": int(pts.shape[0]), "points": pts.tolist()}
    if params is not None:
        doc = {
            "dim": params.dim,
            "radius": params.radius,
            "intensity": params.intensity,
            **doc,
        }
    return json.dumps(doc, indent=2) + "\n"
