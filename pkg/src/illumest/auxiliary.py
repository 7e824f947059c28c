"""Secondary estimators used to cross-check the centroid direction.

Brightest pixel, mean Sobel gradient, k-means of the bright set, moment
comparison against the reference set, and the Hausdorff distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .detect import PixelSet
from .errors import DegenerateReference, EmptySet, TooFewPoints, TooSmall
from .geometry import angle_between_deg, centroid, image_center
from .image import as_gray
from .transport import subsample_indices

KMEANS_MAX_ITERS = 100


@dataclass(frozen=True)
class Cluster:
    centroid: tuple[float, float]
    size: int
    dir: tuple[float, float]
    angle_div_deg: float | None


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    sse_history: list[float]
    n_iter: int


@dataclass(frozen=True)
class Moments:
    mean_diff: tuple[float, float]  # (|dx|, |dy|)
    variance_ratio: float
    var_b: tuple[float, float]  # (var_x, var_y), population
    var_r: tuple[float, float]


def brightest_pixel_direction(img):
    """First maximum in row-major order and its offset from the image center."""
    gray = as_gray(img)
    row, col = divmod(int(np.argmax(gray)), gray.shape[1])
    c_y, c_x = image_center(gray.shape[1], gray.shape[0])
    return (row, col), (row - c_y, col - c_x)


def average_gradient_direction(img) -> tuple[float, float]:
    """Mean of the 3x3 Sobel gradient over the whole image, as ``(d_row, d_col)``.

    Borders replicate the edge pixels. A flat image yields ``(0.0, 0.0)``.
    """
    gray = as_gray(img)
    if min(gray.shape) < 3:
        raise TooSmall("Sobel gradients need an image of at least 3x3")
    data = gray.astype(np.float64)
    g_row = ndimage.sobel(data, axis=0, mode="nearest")
    g_col = ndimage.sobel(data, axis=1, mode="nearest")
    return float(g_row.mean()), float(g_col.mean())


def _kmeanspp(x, k, rng):
    n = len(x)
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining mass sits on chosen points; take the first unused index
            idx = next(i for i in range(n) if i not in chosen)
        chosen.append(idx)
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _assign(x, centers):
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(len(x)), labels]


def _fill_empty(x, centers, labels, d2):
    """Give each empty cluster the farthest point of a cluster that can spare one."""
    k = len(centers)
    for j in range(k):
        if np.any(labels == j):
            continue
        sizes = np.bincount(labels, minlength=k)
        far = int(np.argmax(np.where(sizes[labels] > 1, d2, -1.0)))
        centers[j] = x[far]
        labels[far] = j
        d2[far] = 0.0
    return labels, d2


def kmeans(points, k: int, seed: int = 0, max_iters: int = KMEANS_MAX_ITERS) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding on ``(row, col)`` coordinates.

    Stops when assignments repeat or after ``max_iters`` rounds. A cluster
    that empties is re-seeded at the farthest point of a cluster with more
    than one member, which never increases the within-cluster squared error
    and keeps every cluster nonempty even when points repeat.
    """
    x = np.asarray(points.points if isinstance(points, PixelSet) else points, dtype=np.float64)
    n = len(x)
    if k < 1 or n < k:
        raise TooFewPoints(f"k-means needs at least k={k} points, got {n}")
    rng = np.random.default_rng(seed)
    centers = _kmeanspp(x, k, rng)
    labels, d2 = _fill_empty(x, centers, *_assign(x, centers))
    history = [math.fsum(d2.tolist())]
    it = 0
    for it in range(1, max_iters + 1):
        for j in range(k):
            centers[j] = x[labels == j].mean(axis=0)
        new_labels, d2 = _fill_empty(x, centers, *_assign(x, centers))
        history.append(math.fsum(d2.tolist()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return KMeansResult(centers=centers, labels=labels, sse_history=history, n_iter=it)


def cluster_bright_pixels(points: PixelSet, k: int = 2, seed: int = 0) -> list[Cluster]:
    """k-means clusters of the bright set, each with its own direction vector.

    ``angle_div_deg`` is the angle between a cluster's direction and the
    direction of the whole set; None when either vector is zero.
    """
    if len(points) < max(k, 1):
        raise TooFewPoints(f"need at least {k} points to form {k} clusters")
    res = kmeans(points, k, seed)
    c_y, c_x = image_center(points.width, points.height)
    g_y, g_x = centroid(points)
    global_dir = (g_y - c_y, g_x - c_x)
    out = []
    for j in range(k):
        members = points.points[res.labels == j]
        n = len(members)
        cy = math.fsum(members[:, 0].tolist()) / n
        cx = math.fsum(members[:, 1].tolist()) / n
        vec = (cy - c_y, cx - c_x)
        if vec == (0.0, 0.0) or global_dir == (0.0, 0.0):
            div = None
        else:
            div = angle_between_deg(vec, global_dir)
        out.append(Cluster(centroid=(cy, cx), size=n, dir=vec, angle_div_deg=div))
    return out


def axis_moments(ps: PixelSet) -> tuple[float, float, float, float]:
    """Mean x, mean y, population var x, population var y."""
    rows = ps.points[:, 0].astype(np.float64)
    cols = ps.points[:, 1].astype(np.float64)
    n = len(rows)
    mx, my = math.fsum(cols.tolist()) / n, math.fsum(rows.tolist()) / n
    vx = math.fsum(((cols - mx) ** 2).tolist()) / n
    vy = math.fsum(((rows - my) ** 2).tolist()) / n
    return mx, my, vx, vy


def moments_comparison(b: PixelSet, r: PixelSet) -> Moments:
    """Mean offsets (x, y) and the ratio of total population variances."""
    if len(b) == 0 or len(r) == 0:
        raise EmptySet("moment comparison needs two nonempty sets")
    bx, by, bvx, bvy = axis_moments(b)
    rx, ry, rvx, rvy = axis_moments(r)
    if rvx + rvy == 0:
        raise DegenerateReference("reference set has zero variance")
    return Moments(
        mean_diff=(abs(bx - rx), abs(by - ry)),
        variance_ratio=(bvx + bvy) / (rvx + rvy),
        var_b=(bvx, bvy),
        var_r=(rvx, rvy),
    )


def _directed_sq(a, b, block_elems=1 << 20):
    worst = 0.0
    step = max(1, block_elems // len(b))
    for s in range(0, len(a), step):
        d = a[s : s + step, None, :] - b[None, :, :]
        nearest = np.einsum("ijk,ijk->ij", d, d).min(axis=1)
        worst = max(worst, float(nearest.max()))
    return worst


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance by exhaustive pairwise evaluation."""
    pa = np.asarray(a.points if isinstance(a, PixelSet) else a, dtype=np.float64).reshape(-1, 2)
    pb = np.asarray(b.points if isinstance(b, PixelSet) else b, dtype=np.float64).reshape(-1, 2)
    if len(pa) == 0 or len(pb) == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    return math.sqrt(max(_directed_sq(pa, pb), _directed_sq(pb, pa)))


def capped_hausdorff(a: PixelSet, b: PixelSet, cap: int, seed: int) -> tuple[float, bool]:
    """Hausdorff distance after the same seeded subsampling used for transport."""
    ia = subsample_indices(len(a), cap, seed)
    ib = subsample_indices(len(b), cap, seed)
    pa = a.points if ia is None else a.points[ia]
    pb = b.points if ib is None else b.points[ib]
    return hausdorff_distance(pa, pb), ia is not None or ib is not None
