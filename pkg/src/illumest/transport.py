"""Entropic Wasserstein-2 between point clouds.

The headline quantity is the debiased Sinkhorn divergence

    S(a, b) = OT_eps(a, b) - OT_eps(a, a) / 2 - OT_eps(b, b) / 2

for the quadratic cost ``|x - y|^2`` and ``eps = blur**2``. Each ``OT_eps``
term is solved with log-domain Sinkhorn iterations on the dual potentials,
warm-started by geometric annealing of the blur from the cloud diameter
down to the target value. ``exact_w2_assignment`` provides the unregularized
reference for equal-size uniform clouds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .detect import PixelSet
from .errors import EmptySet, InvalidParam, NonUniformWeights, SizeMismatch, TooLarge

EXACT_MAX_POINTS = 512
_BLOCK_ELEMS = 1 << 17
_DENSE_MAX = 1 << 14
_STAGE_TOL = 1e-3
_amax = np.maximum.reduce
_asum = np.add.reduce


@dataclass(frozen=True, eq=False)
class WeightedCloud:
    """Discrete probability measure on the plane.

    ``points`` is ``(n, 2)`` float64, ``weights`` is ``(n,)`` and sums to 1.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 2)
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if len(pts) != len(w):
            raise InvalidParam("points and weights differ in length")
        if len(pts) and (np.any(w < 0) or abs(math.fsum(w.tolist()) - 1.0) > 1e-12):
            raise InvalidParam("weights must be nonnegative and sum to 1")
        if not np.all(np.isfinite(pts)):
            raise InvalidParam("cloud coordinates must be finite")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points) -> WeightedCloud:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        if len(pts) == 0:
            raise EmptySet("cannot build a cloud from zero points")
        return cls(pts, np.full(len(pts), 1.0 / len(pts)))

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class TransportConfig:
    """Solver settings.

    ``scaling`` is the per-stage blur reduction of the annealing schedule and
    ``stage_iters`` caps the iterations spent at each intermediate blur.
    ``relax`` is the over-relaxation factor of the cross-term updates.
    """

    blur: float = 0.05
    max_iters: int = 500
    tol: float = 1e-6
    seed: int = 0
    subsample_cap: int = 4096
    scaling: float = 0.5
    stage_iters: int = 20
    relax: float = 1.3
    order_p: int = 2

    def __post_init__(self):
        if self.order_p != 2:
            raise InvalidParam("only order p = 2 is supported")
        if not self.blur > 0:
            raise InvalidParam("blur must be positive")
        if self.max_iters < 1 or self.stage_iters < 1:
            raise InvalidParam("iteration caps must be >= 1")
        if not self.tol > 0:
            raise InvalidParam("tol must be positive")
        if self.subsample_cap < 1:
            raise InvalidParam("subsample_cap must be >= 1")
        if not 1 <= self.relax < 2:
            raise InvalidParam("relax must lie in [1, 2)")
        if not 0 < self.scaling < 1:
            raise InvalidParam("scaling must lie in (0, 1)")

    @property
    def eps(self) -> float:
        return self.blur * self.blur

    @property
    def effective_max_iters(self) -> int:
        return max(self.max_iters, 2000) if self.blur < 0.01 else self.max_iters


@dataclass(frozen=True, eq=False)
class TransportPlan:
    coupling: np.ndarray

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.coupling.sum(axis=1), self.coupling.sum(axis=0)


@dataclass(frozen=True)
class TransportResult:
    w2: float
    ot_eps: float
    divergence: float
    iters: int
    converged: bool
    marginal_err: float
    subsampled: bool
    blur: float


def sample_uniform_reference(n: int, width: int, height: int, seed: int = 0) -> PixelSet:
    """``n`` independent pixels with ``x ~ U{0..w-1}`` and ``y ~ U{0..h-1}``.

    Duplicates are allowed. Columns are drawn before rows from one
    ``numpy.random.default_rng(seed)`` stream.
    """
    if n < 1:
        raise InvalidParam("reference size must be >= 1")
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, width, size=n)
    ys = rng.integers(0, height, size=n)
    return PixelSet(np.column_stack([ys, xs]), width=width, height=height)


def normalize_cloud(points: PixelSet) -> WeightedCloud:
    """Map pixels to ``(x / (w-1), y / (h-1))`` in the unit square, uniform weights."""
    if len(points) == 0:
        raise EmptySet("cannot normalize an empty point set")
    u = points.cols / max(points.width - 1, 1)
    v = points.rows / max(points.height - 1, 1)
    return WeightedCloud.uniform(np.column_stack([u, v]))


def pixel_cloud(points: PixelSet) -> WeightedCloud:
    """Uniform cloud at raw ``(x, y)`` pixel coordinates."""
    if len(points) == 0:
        raise EmptySet("cannot build a cloud from an empty point set")
    return WeightedCloud.uniform(np.column_stack([points.cols, points.rows]).astype(np.float64))


def subsample_indices(n: int, cap: int, seed: int) -> np.ndarray | None:
    """Sorted random subset of ``range(n)`` of size ``cap``, or None if ``n <= cap``.

    The stream is keyed on ``(seed, n)`` so the draw does not depend on the
    order in which clouds are processed.
    """
    if n <= cap:
        return None
    rng = np.random.default_rng([seed, n])
    return np.sort(rng.choice(n, size=cap, replace=False))


def subsample_cloud(cloud: WeightedCloud, cap: int, seed: int) -> tuple[WeightedCloud, bool]:
    idx = subsample_indices(len(cloud), cap, seed)
    if idx is None:
        return cloud, False
    w = cloud.weights[idx]
    return WeightedCloud(cloud.points[idx], w / w.sum()), True


def _softmin(eps, x, y, h, prev=None):
    """``-eps * log sum_j exp((h_j - |x_i - y_j|^2) / eps)`` for every row ``i``.

    The squared distance is expanded and ``h`` folded into one augmented
    matmul per row block; blocks are sized to stay cache resident. ``prev``
    is an earlier output at the same ``eps``; when given, it serves as the
    log-sum-exp shift so the row-max pass can be skipped. Rows where that
    shift is too far off fall back to the exact row maximum.
    """
    inv = 1.0 / eps
    ya = np.empty((4, len(y)))
    ya[:2] = (2.0 * inv) * y.T
    ya[2] = (h - np.einsum("ij,ij->i", y, y)) * inv
    ya[3] = -1.0
    xx = np.einsum("ij,ij->i", x, x)
    xa = np.zeros((len(x), 4))
    xa[:, :2] = x
    xa[:, 2] = 1.0
    if prev is not None:
        xa[:, 3] = (xx - prev) * inv
    out = np.empty(len(x))
    ones = np.ones(len(y))
    block = max(1, _BLOCK_ELEMS // len(y))
    for s in range(0, len(x), block):
        rows = slice(s, s + block)
        v = xa[rows] @ ya
        if prev is None:
            shift = v.max(axis=1)
            v -= shift[:, None]
            np.exp(v, out=v)
            total = v @ ones
        else:
            shift = np.zeros(len(v))
            np.exp(v, out=v)
            total = v @ ones
            bad = ~((total > 1e-200) & (total < 1e200))
            if bad.any():
                w = xa[rows][bad, :3] @ ya[:3]
                shift[bad] = w.max(axis=1)
                w -= shift[bad][:, None]
                total[bad] = np.exp(w).sum(axis=1)
            shift += xa[rows, 3]
        out[rows] = xx[rows] - eps * (shift + np.log(total))
    return out


def _dense_softmin(cost):
    """Row softmin against a precomputed cost matrix (small problems)."""
    scaled = {}

    def op(eps, h, prev=None):
        k = scaled.get(eps)
        if k is None:
            scaled.clear()
            k = scaled[eps] = cost * (-1.0 / eps)
        v = k + h * (1.0 / eps)
        mx = _amax(v, axis=1)
        v -= mx[:, None]
        np.exp(v, out=v)
        return -eps * (mx + np.log(_asum(v, axis=1)))

    return op


def _operators(x, y):
    """Softmin operators ``x <- y`` and ``y <- x``.

    Small problems keep the full cost matrix, which costs less per call
    and avoids the cancellation of the expanded square; large ones stream
    row blocks through :func:`_softmin`.
    """
    if len(x) * len(y) <= _DENSE_MAX:
        cost = _sq_dists(x, y)
        return _dense_softmin(cost), _dense_softmin(np.ascontiguousarray(cost.T))
    return (
        lambda eps, h, prev=None: _softmin(eps, x, y, h, prev),
        lambda eps, h, prev=None: _softmin(eps, y, x, h, prev),
    )


def _blur_schedule(diameter, blur, scaling):
    stages = []
    b = diameter
    while b > blur:
        stages.append(b)
        b *= scaling
    stages.append(blur)
    return stages


def _solve_cross(x, a, y, b, stages, cfg):
    """Over-relaxed alternating Sinkhorn on ``(f, g)``.

    Returns potentials, iterations and the row-marginal violation of the
    returned pair. With ``relax = 1`` this is the plain alternating scheme;
    the final ``g`` is always an exact half-step from ``f``, so the column
    marginals hold to rounding.
    """
    la, lb = np.log(a), np.log(b)
    to_x, to_y = _operators(x, y)
    w = cfg.relax
    f = np.zeros(len(x))
    g = np.zeros(len(y))
    iters, err = 0, math.inf
    for k, blur in enumerate(stages):
        eps = blur * blur
        last = k == len(stages) - 1
        cap = cfg.effective_max_iters if last else cfg.stage_iters
        tol = cfg.tol if last else _STAGE_TOL
        ea, eb = eps * la, eps * lb
        f = to_x(eps, g + eb)
        g = to_y(eps, f + ea)
        ft = gt = None
        for _ in range(cap):
            ft = to_x(eps, g + eb, ft)
            # marginal violation of (f, g): a_i * (exp((f - T(g))/eps) - 1)
            err_a = float(_amax(np.abs(a * np.expm1((f - ft) / eps))))
            f = f + w * (ft - f)
            gt = to_y(eps, f + ea, gt)
            g = g + w * (gt - g)
            iters += 1
            err = err_a
            if err < tol:
                break
    g = to_y(eps, f + ea, g)
    # columns now hold exactly; report the row violation of the returned pair
    ft = to_x(eps, g + eb, ft)
    err = float(_amax(np.abs(a * np.expm1((f - ft) / eps))))
    return f, g, iters, err


def _solve_self(x, a, stages, cfg):
    """Symmetric Sinkhorn ``f <- (f + T(f)) / 2`` for ``OT_eps(a, a)``."""
    la = np.log(a)
    op, _ = _operators(x, x)
    f = np.zeros(len(x))
    iters, err = 0, math.inf
    for k, blur in enumerate(stages):
        eps = blur * blur
        last = k == len(stages) - 1
        cap = cfg.effective_max_iters if last else cfg.stage_iters
        tol = cfg.tol if last else _STAGE_TOL
        t = None
        ea = eps * la
        for _ in range(cap):
            t = op(eps, f + ea, t)
            err = float(_amax(np.abs(a * np.expm1((f - t) / eps))))
            f = 0.5 * (f + t)
            iters += 1
            if err < tol:
                break
    return f, iters, err


def _support(cloud):
    keep = cloud.weights > 0
    return cloud.points[keep], cloud.weights[keep]


def _cloud_key(cloud):
    return (len(cloud), cloud.points.tobytes(), cloud.weights.tobytes())


def _precedes(a, b):
    """Numeric lexicographic order on (size, coordinates, weights).

    Unlike comparing raw bytes, a common shift of both clouds keeps the
    order, so translated inputs are solved with the same roles.
    """
    if len(a) != len(b):
        return len(a) < len(b)
    for u, v in ((a.points.ravel(), b.points.ravel()), (a.weights, b.weights)):
        diff = np.flatnonzero(u != v)
        if diff.size:
            return bool(u[diff[0]] < v[diff[0]])
    return False


def _prepare(a, b, cfg):
    """Canonically ordered, centered supports plus the annealing schedule."""
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("both clouds must be nonempty")
    if _precedes(b, a):
        a, b = b, a
    x, wa = _support(a)
    y, wb = _support(b)
    both = np.concatenate([x, y])
    shift = both.mean(axis=0)
    x, y = x - shift, y - shift
    lo, hi = both.min(axis=0), both.max(axis=0)
    diameter = float(np.hypot(*(hi - lo)))
    return x, wa, y, wb, _blur_schedule(diameter, cfg.blur, cfg.scaling)


def sinkhorn_divergence(a: WeightedCloud, b: WeightedCloud, cfg: TransportConfig | None = None) -> TransportResult:
    """Debiased entropic W2 between two clouds.

    Clouds larger than ``cfg.subsample_cap`` are subsampled first with the
    config seed. Non-convergence is reported through ``converged`` and
    ``marginal_err``; the result is returned either way. The argument order
    does not matter: the pair is put in a canonical order before solving,
    so ``S(a, b)`` and ``S(b, a)`` are bit-identical.
    """
    cfg = cfg or TransportConfig()
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("both clouds must be nonempty")
    a, sub_a = subsample_cloud(a, cfg.subsample_cap, cfg.seed)
    b, sub_b = subsample_cloud(b, cfg.subsample_cap, cfg.seed)
    same = _cloud_key(a) == _cloud_key(b)
    x, wa, y, wb, stages = _prepare(a, b, cfg)

    fa, it_a, err_a = _solve_self(x, wa, stages, cfg)
    ot_aa = 2.0 * float(wa @ fa)
    if same:
        ot_ab, ot_bb = ot_aa, ot_aa
        iters, err = it_a, err_a
    else:
        fb, it_b, err_b = _solve_self(y, wb, stages, cfg)
        ot_bb = 2.0 * float(wb @ fb)
        f, g, it_ab, err_ab = _solve_cross(x, wa, y, wb, stages, cfg)
        ot_ab = float(wa @ f) + float(wb @ g)
        iters = it_a + it_b + it_ab
        err = max(err_a, err_b, err_ab)

    div = ot_ab - 0.5 * ot_aa - 0.5 * ot_bb
    return TransportResult(
        w2=math.sqrt(max(div, 0.0)),
        ot_eps=ot_ab,
        divergence=div,
        iters=iters,
        converged=err < cfg.tol,
        marginal_err=err,
        subsampled=sub_a or sub_b,
        blur=cfg.blur,
    )


def entropic_plan(a: WeightedCloud, b: WeightedCloud, cfg: TransportConfig | None = None) -> TransportPlan:
    """Coupling of the regularized problem ``OT_eps(a, b)`` (dense, no subsampling)."""
    cfg = cfg or TransportConfig()
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("both clouds must be nonempty")
    keep_a, keep_b = a.weights > 0, b.weights > 0
    x, wa = a.points[keep_a], a.weights[keep_a]
    y, wb = b.points[keep_b], b.weights[keep_b]
    both = np.concatenate([x, y])
    x, y = x - both.mean(axis=0), y - both.mean(axis=0)
    diameter = float(np.hypot(*(both.max(axis=0) - both.min(axis=0))))
    stages = _blur_schedule(diameter, cfg.blur, cfg.scaling)
    f, g, _, _ = _solve_cross(x, wa, y, wb, stages, cfg)
    log_p = (f[:, None] + g[None, :] - _sq_dists(x, y)) / cfg.eps
    inner = np.exp(log_p) * wa[:, None] * wb[None, :]
    coupling = np.zeros((len(a), len(b)))
    coupling[np.ix_(keep_a, keep_b)] = inner
    return TransportPlan(coupling)


def _sq_dists(x, y):
    d = x[:, None, :] - y[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def exact_w2_assignment(a: WeightedCloud, b: WeightedCloud) -> tuple[float, TransportPlan]:
    """Unregularized W2 for equal-size uniform clouds via optimal assignment.

    With uniform equal marginals some optimal plan is a permutation, so
    ``W2^2 = min_pi (1/n) sum_i |a_i - b_pi(i)|^2``.
    """
    n = len(a)
    if n == 0 or len(b) == 0:
        raise EmptySet("both clouds must be nonempty")
    if len(b) != n:
        raise SizeMismatch(f"clouds differ in size: {n} vs {len(b)}")
    if n > EXACT_MAX_POINTS:
        raise TooLarge(f"exact solver limited to {EXACT_MAX_POINTS} points, got {n}")
    for c in (a, b):
        if np.max(np.abs(c.weights - 1.0 / n)) > 1e-12:
            raise NonUniformWeights("exact solver needs uniform weights")
    cost = _sq_dists(a.points, b.points)
    rows, cols = linear_sum_assignment(cost)
    w2sq = math.fsum(cost[rows, cols].tolist()) / n
    coupling = np.zeros((n, n))
    coupling[rows, cols] = 1.0 / n
    return math.sqrt(w2sq), TransportPlan(coupling)
