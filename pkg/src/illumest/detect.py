"""Bright-pixel detection: fixed and Otsu thresholds, mask to point set."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImage, EmptyBrightSetWarning, InvalidParam
from .image import as_gray

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 200


@dataclass(frozen=True, eq=False)
class PixelSet:
    """Integer pixel coordinates ``(row, col)`` on a ``height x width`` raster.

    ``points`` is an ``(n, 2)`` int64 array. Sets built from a mask are in
    row-major scan order without duplicates; sampled reference sets may
    contain duplicates.
    """

    points: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        if self.width < 1 or self.height < 1:
            raise InvalidParam("source dimensions must be >= 1")
        if pts.size and (
            pts[:, 0].min() < 0 or pts[:, 0].max() >= self.height
            or pts[:, 1].min() < 0 or pts[:, 1].max() >= self.width
        ):
            raise InvalidParam("point outside the source raster")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PixelSet):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and np.array_equal(
            self.points, other.points
        )

    @property
    def rows(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def cols(self) -> np.ndarray:
        return self.points[:, 1]


def threshold_mask(img, t: int = DEFAULT_THRESHOLD) -> np.ndarray:
    """Boolean mask of pixels strictly brighter than ``t``."""
    if not 0 <= t <= 255:
        raise InvalidParam(f"threshold must lie in 0..255, got {t}")
    return as_gray(img) > t


def otsu_threshold(img) -> int:
    """Otsu's threshold over the 256-bin histogram.

    Returns the ``t`` that maximises between-class variance for the split
    ``{I <= t} | {I > t}`` (matching :func:`threshold_mask`). Scores are
    compared exactly in integer arithmetic; ties go to the smallest ``t``.
    """
    gray = as_gray(img)
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.int64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateImage("Otsu needs at least two distinct intensities")
    levels = np.arange(256, dtype=np.int64)
    total_n = int(hist.sum())
    total_s = int((hist * levels).sum())
    c0 = np.cumsum(hist)
    s0 = np.cumsum(hist * levels)

    best_t, best_num, best_den = None, 0, 1
    for t in range(255):
        n0, m0 = int(c0[t]), int(s0[t])
        n1, m1 = total_n - n0, total_s - m0
        if n0 == 0 or n1 == 0:
            continue
        # between-class variance * N^2 = (m1*n0 - m0*n1)^2 / (n0*n1)
        num = (m1 * n0 - m0 * n1) ** 2
        den = n0 * n1
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def mask_to_pixel_set(mask) -> PixelSet:
    """Coordinates of the set bits in row-major order.

    An empty result triggers an :class:`EmptyBrightSetWarning` (and a log
    record) rather than an error.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise InvalidParam(f"mask must be 2-D, got shape {mask.shape}")
    pts = np.argwhere(mask.astype(bool))
    height, width = mask.shape
    if len(pts) == 0:
        msg = "no bright pixels found; consider a lower threshold"
        log.warning(msg)
        warnings.warn(msg, EmptyBrightSetWarning, stacklevel=2)
    return PixelSet(pts, width=width, height=height)


def bright_pixels(img, t: int = DEFAULT_THRESHOLD) -> PixelSet:
    return mask_to_pixel_set(threshold_mask(img, t))
