"""Centroid, image center and centroid-based illumination direction.

Vectors are ``(d_row, d_col)`` displacements in pixels. Angles follow one
presentation convention: degrees counter-clockwise from image-right, with
screen-up (decreasing row) at +90.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detect import PixelSet
from .errors import EmptySet, InvalidParam, ZeroVector


@dataclass(frozen=True)
class DirectionEstimate:
    centroid: tuple[float, float]
    center: tuple[float, float]
    vector: tuple[float, float]
    angle_deg: float | None
    n_points: int


def centroid(points: PixelSet) -> tuple[float, float]:
    """Mean row and mean column, with exactly rounded (``math.fsum``) sums."""
    if len(points) == 0:
        raise EmptySet("centroid of an empty point set")
    n = len(points)
    rows = points.points[:, 0].tolist()
    cols = points.points[:, 1].tolist()
    return math.fsum(rows) / n, math.fsum(cols) / n


def image_center(width: int, height: int) -> tuple[float, float]:
    """``(height / 2, width / 2)``; note this is not the pixel-grid center."""
    if width < 1 or height < 1:
        raise InvalidParam("width and height must be >= 1")
    return height / 2.0, width / 2.0


def vector_angle_deg(vec) -> float | None:
    """Screen angle of a ``(d_row, d_col)`` vector in ``[0, 360)``; None for zero."""
    d_row, d_col = float(vec[0]), float(vec[1])
    if d_row == 0.0 and d_col == 0.0:
        return None
    ang = math.degrees(math.atan2(-d_row, d_col)) % 360.0
    # -0.0 and tiny negatives can round to 360.0
    return 0.0 if ang >= 360.0 else ang


def direction_from_centroid(cen, width: int, height: int, n_points: int) -> DirectionEstimate:
    c_y, c_x = image_center(width, height)
    vec = (cen[0] - c_y, cen[1] - c_x)
    return DirectionEstimate(
        centroid=(float(cen[0]), float(cen[1])),
        center=(c_y, c_x),
        vector=vec,
        angle_deg=vector_angle_deg(vec),
        n_points=n_points,
    )


def direction(points: PixelSet) -> DirectionEstimate:
    """Displacement from the image center to the centroid of ``points``."""
    return direction_from_centroid(centroid(points), points.width, points.height, len(points))


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64).reshape(2)
    b = np.asarray(b, dtype=np.float64).reshape(2)
    na, nb = math.hypot(*a), math.hypot(*b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("direction comparison needs two nonzero vectors")
    return a, b, na, nb


def cosine_similarity(a, b) -> float:
    a, b, na, nb = _pair(a, b)
    cos = float(a @ b) / (na * nb)
    return min(1.0, max(-1.0, cos))


def angle_between_deg(a, b) -> float:
    """Unsigned angle between two nonzero vectors, in ``[0, 180]``."""
    a, b, na, nb = _pair(a, b)
    # atan2 of cross and dot is well conditioned near 0 and 180 degrees
    cross = a[0] * b[1] - a[1] * b[0]
    return math.degrees(math.atan2(abs(cross), float(a @ b)))
