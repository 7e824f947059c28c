"""Annotated overlay: bright pixels, blue centroid disc, green direction arrow."""
from __future__ import annotations

import math

import numpy as np
from PIL import Image, ImageDraw

from .detect import threshold_mask
from .errors import DimensionMismatch
from .image import as_rgb, to_grayscale
from .transport import subsample_indices

MAX_MARKS = 5000
MARK_COLOR = (255, 0, 0)
CENTROID_COLOR = (0, 0, 255)
ARROW_COLOR = (0, 255, 0)
CENTROID_RADIUS = 4


def arrow_geometry(report):
    """``((x0, y0), (x1, y1))`` in drawing coordinates, or None when there is no arrow.

    The arrow runs from the image center to the centroid.
    """
    if report.centroid is None or report.center is None:
        return None
    (cy, cx), (gy, gx) = report.center, report.centroid
    if (cy, cx) == (gy, gx):
        return None
    return (cx, cy), (gx, gy)


def _arrowhead(tail, tip, length):
    dx, dy = tip[0] - tail[0], tip[1] - tail[1]
    norm = math.hypot(dx, dy)
    ux, uy = dx / norm, dy / norm
    head = min(length, 0.5 * norm)
    bx, by = tip[0] - head * ux, tip[1] - head * uy
    half = 0.5 * head
    return [tip, (bx - half * uy, by + half * ux), (bx + half * uy, by - half * ux)]


def render_overlay(img, report, max_marks: int = MAX_MARKS) -> np.ndarray:
    """Draw the report's marks on a copy of ``img``; the report is not modified."""
    rgb = as_rgb(img)
    if (report.height, report.width) != rgb.shape[:2]:
        raise DimensionMismatch(
            f"report is for {report.height}x{report.width}, image is {rgb.shape[0]}x{rgb.shape[1]}"
        )
    out = rgb.copy()
    if report.centroid is None:
        return out

    if report.n_bright:
        pts = np.argwhere(threshold_mask(to_grayscale(rgb), report.threshold_used))
        idx = subsample_indices(len(pts), max_marks, report.seed)
        if idx is not None:
            pts = pts[idx]
        out[pts[:, 0], pts[:, 1]] = MARK_COLOR

    canvas = Image.fromarray(out)
    draw = ImageDraw.Draw(canvas)
    gy, gx = report.centroid
    r = CENTROID_RADIUS
    draw.ellipse([gx - r, gy - r, gx + r, gy + r], fill=CENTROID_COLOR)
    seg = arrow_geometry(report)
    if seg is not None:
        width = max(1, round(min(rgb.shape[:2]) / 200))
        draw.line([seg[0], seg[1]], fill=ARROW_COLOR, width=width)
        head = max(6.0, min(rgb.shape[:2]) / 30)
        draw.polygon(_arrowhead(seg[0], seg[1], head), fill=ARROW_COLOR)
    return np.asarray(canvas).copy()
