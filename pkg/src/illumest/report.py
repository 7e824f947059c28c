"""Per-image pipeline and its JSON report.

decode -> grayscale -> threshold -> bright set -> centroid direction ->
uniform reference -> Sinkhorn W2 -> auxiliary estimators.
"""
from __future__ import annotations

import json
import logging
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from os import PathLike

import numpy as np

from . import __version__
from .auxiliary import (
    average_gradient_direction,
    axis_moments,
    brightest_pixel_direction,
    capped_hausdorff,
    cluster_bright_pixels,
    moments_comparison,
)
from .detect import DEFAULT_THRESHOLD, mask_to_pixel_set, otsu_threshold, threshold_mask
from .errors import DegenerateImage, DegenerateReference, EmptyBrightSetWarning, IllumError, InvalidParam, TooSmall
from .geometry import angle_between_deg, cosine_similarity, direction, direction_from_centroid
from .image import as_rgb, load_image, to_grayscale
from .transport import (
    TransportConfig,
    normalize_cloud,
    pixel_cloud,
    sample_uniform_reference,
    sinkhorn_divergence,
)

log = logging.getLogger(__name__)

EMPTY_BRIGHT_SET = "EmptyBrightSet"


@dataclass(frozen=True)
class AnalysisOptions:
    """Pipeline settings; ``threshold`` is an intensity or ``"auto"`` for Otsu."""

    threshold: int | str = DEFAULT_THRESHOLD
    blur: float = 0.05
    seed: int = 0
    k: int = 2
    subsample_cap: int = 4096
    normalize: bool = True
    paper_literal_empty: bool = False
    max_iters: int = 500
    tol: float = 1e-6

    def __post_init__(self):
        if self.threshold != "auto" and not (
            isinstance(self.threshold, (int, np.integer)) and 0 <= self.threshold <= 255
        ):
            raise InvalidParam(f"threshold must be 0..255 or 'auto', got {self.threshold!r}")
        if self.k < 1:
            raise InvalidParam("k must be >= 1")
        self.transport_config()

    def transport_config(self) -> TransportConfig:
        return TransportConfig(
            blur=self.blur,
            max_iters=self.max_iters,
            tol=self.tol,
            seed=self.seed,
            subsample_cap=self.subsample_cap,
        )


def _f(v):
    """Round to 9 significant digits; the JSON float format."""
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value in report: {v}")
    return float(f"{v:.9g}") + 0.0


def _pair(v):
    return None if v is None else (_f(v[0]), _f(v[1]))


@dataclass(frozen=True)
class WassersteinSummary:
    w2: float
    ot_eps: float
    divergence: float
    blur: float
    iters: int
    converged: bool
    marginal_err: float
    subsampled: bool
    units: str


@dataclass(frozen=True)
class ClusterSummary:
    centroid: tuple[float, float]
    size: int
    dir: tuple[float, float]
    angle_div_deg: float | None


@dataclass(frozen=True)
class AuxSummary:
    brightest_px: tuple[int, int]
    brightest_dir: tuple[float, float]
    cos_sim_brightest_vs_centroid: float | None
    gradient_dir: tuple[float, float] | None
    gradient_angle_diff_deg: float | None
    clusters: tuple[ClusterSummary, ...]
    mean_diff: tuple[float, float]
    variance_ratio: float | None
    variance_b: tuple[float, float]
    variance_r: tuple[float, float]
    hausdorff_px: float
    hausdorff_subsampled: bool


@dataclass(frozen=True)
class IlluminationReport:
    """Everything computed for one image.

    Direction fields, ``wasserstein`` and ``aux`` are None when no pixel
    exceeded the threshold (``warning == "EmptyBrightSet"``). Failed inputs
    carry ``status == "error"`` and a one-line ``error``.
    """

    input_path: str
    status: str = "ok"
    error: str | None = None
    width: int | None = None
    height: int | None = None
    threshold_mode: str | None = None
    threshold_used: int | None = None
    n_bright: int | None = None
    warning: str | None = None
    centroid: tuple[float, float] | None = None
    center: tuple[float, float] | None = None
    direction: tuple[float, float] | None = None
    angle_deg: float | None = None
    wasserstein: WassersteinSummary | None = None
    aux: AuxSummary | None = None
    seed: int = 0
    tool_version: str = __version__
    runtime_ms: float = 0.0

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> IlluminationReport:
        d = dict(d)
        for key in ("centroid", "center", "direction"):
            d[key] = _tuple(d.get(key))
        if d.get("wasserstein") is not None:
            d["wasserstein"] = WassersteinSummary(**d["wasserstein"])
        if d.get("aux") is not None:
            aux = dict(d["aux"])
            for key in ("brightest_px", "brightest_dir", "gradient_dir", "mean_diff", "variance_b", "variance_r"):
                aux[key] = _tuple(aux.get(key))
            aux["clusters"] = tuple(
                ClusterSummary(**{**c, "centroid": _tuple(c["centroid"]), "dir": _tuple(c["dir"])})
                for c in aux["clusters"]
            )
            d["aux"] = AuxSummary(**aux)
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


def _tuple(v):
    return None if v is None else tuple(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def reports_from_json(text: str) -> list[IlluminationReport]:
    return [IlluminationReport.from_dict(d) for d in json.loads(text)]


def _aux_summary(gray, bright, reference, dir_vec, opts) -> AuxSummary:
    b_px, b_dir = brightest_pixel_direction(gray)
    nonzero = dir_vec != (0.0, 0.0)
    cos_b = cosine_similarity(b_dir, dir_vec) if nonzero and b_dir != (0.0, 0.0) else None
    try:
        g_dir = average_gradient_direction(gray)
    except TooSmall:
        g_dir = None
    g_diff = None
    if g_dir is not None and nonzero and g_dir != (0.0, 0.0):
        g_diff = angle_between_deg(g_dir, dir_vec)
    k = min(opts.k, len(bright))
    clusters = tuple(
        ClusterSummary(
            centroid=_pair(c.centroid),
            size=c.size,
            dir=_pair(c.dir),
            angle_div_deg=_f(c.angle_div_deg),
        )
        for c in cluster_bright_pixels(bright, k, opts.seed)
    )
    try:
        mom = moments_comparison(bright, reference)
        mean_diff, ratio, var_b, var_r = mom.mean_diff, mom.variance_ratio, mom.var_b, mom.var_r
    except DegenerateReference:
        # 1-pixel reference or 1x1 raster
        bx, by, bvx, bvy = axis_moments(bright)
        rx, ry, rvx, rvy = axis_moments(reference)
        mean_diff, ratio, var_b, var_r = (abs(bx - rx), abs(by - ry)), None, (bvx, bvy), (rvx, rvy)
    haus, haus_sub = capped_hausdorff(bright, reference, opts.subsample_cap, opts.seed)
    return AuxSummary(
        brightest_px=b_px,
        brightest_dir=_pair(b_dir),
        cos_sim_brightest_vs_centroid=_f(cos_b),
        gradient_dir=_pair(g_dir),
        gradient_angle_diff_deg=_f(g_diff),
        clusters=clusters,
        mean_diff=_pair(mean_diff),
        variance_ratio=_f(ratio),
        variance_b=_pair(var_b),
        variance_r=_pair(var_r),
        hausdorff_px=_f(haus),
        hausdorff_subsampled=haus_sub,
    )


def analyze_array(rgb, opts: AnalysisOptions | None = None, input_path: str = "<array>") -> IlluminationReport:
    """Run the full pipeline on an in-memory RGB raster."""
    opts = opts or AnalysisOptions()
    start = time.perf_counter()
    rgb = as_rgb(rgb)
    gray = to_grayscale(rgb)
    height, width = gray.shape

    if opts.threshold == "auto":
        mode = "otsu"
        try:
            t = otsu_threshold(gray)
        except DegenerateImage:
            # flat image: no split exists, so nothing can be brighter than it
            t = int(gray.flat[0])
    else:
        mode, t = "fixed", int(opts.threshold)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EmptyBrightSetWarning)
        bright = mask_to_pixel_set(threshold_mask(gray, t))
    warning = EMPTY_BRIGHT_SET if any(issubclass(w.category, EmptyBrightSetWarning) for w in caught) else None

    base = dict(
        input_path=str(input_path),
        width=width,
        height=height,
        threshold_mode=mode,
        threshold_used=t,
        n_bright=len(bright),
        warning=warning,
        seed=opts.seed,
    )

    if len(bright) == 0:
        if opts.paper_literal_empty:
            est = direction_from_centroid((0.0, 0.0), width, height, 0)
            base.update(
                centroid=_pair(est.centroid),
                center=_pair(est.center),
                direction=_pair(est.vector),
                angle_deg=_f(est.angle_deg),
            )
        return IlluminationReport(**base, runtime_ms=_elapsed(start))

    est = direction(bright)
    reference = sample_uniform_reference(len(bright), width, height, opts.seed)
    to_cloud = normalize_cloud if opts.normalize else pixel_cloud
    tr = sinkhorn_divergence(to_cloud(bright), to_cloud(reference), opts.transport_config())
    wass = WassersteinSummary(
        w2=_f(tr.w2),
        ot_eps=_f(tr.ot_eps),
        divergence=_f(tr.divergence),
        blur=_f(tr.blur),
        iters=tr.iters,
        converged=tr.converged,
        marginal_err=_f(tr.marginal_err),
        subsampled=tr.subsampled,
        units="normalized" if opts.normalize else "pixels",
    )
    aux = _aux_summary(gray, bright, reference, est.vector, opts)
    base.update(
        centroid=_pair(est.centroid),
        center=_pair(est.center),
        direction=_pair(est.vector),
        angle_deg=_f(est.angle_deg),
        wasserstein=wass,
        aux=aux,
    )
    return IlluminationReport(**base, runtime_ms=_elapsed(start))


def _elapsed(start):
    return round((time.perf_counter() - start) * 1000.0, 3)


def analyze_image(path: str | PathLike, opts: AnalysisOptions | None = None) -> IlluminationReport:
    """Load ``path`` and analyze it.

    Raises:
        DecodeError: the file is not a decodable PNG/JPEG.
        OSError: the file cannot be read.
    """
    return analyze_array(load_image(path), opts, input_path=os.fspath(path))


def _analyze_or_error(path, opts) -> IlluminationReport:
    try:
        return analyze_image(path, opts)
    except (OSError, IllumError) as exc:
        log.error("%s: %s", path, exc)
        return IlluminationReport(input_path=os.fspath(path), status="error", error=_one_line(exc), seed=opts.seed)


def _one_line(exc):
    text = str(exc).splitlines()[0] if str(exc) else ""
    return f"{type(exc).__name__}: {text}"


def batch(paths, opts: AnalysisOptions | None = None, jobs: int | None = 1) -> list[IlluminationReport]:
    """Analyze ``paths`` in order; failures become ``status == "error"`` entries.

    ``jobs > 1`` runs images in worker processes; output order and values
    do not depend on ``jobs``.
    """
    opts = opts or AnalysisOptions()
    paths = list(paths)
    if not paths:
        raise InvalidParam("batch needs at least one path")
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(paths) == 1:
        return [_analyze_or_error(p, opts) for p in paths]
    with ProcessPoolExecutor(max_workers=min(jobs, len(paths))) as pool:
        return list(pool.map(_analyze_or_error, paths, [opts] * len(paths)))


__all__ = [
    "AnalysisOptions",
    "AuxSummary",
    "ClusterSummary",
    "IlluminationReport",
    "WassersteinSummary",
    "analyze_array",
    "analyze_image",
    "batch",
    "reports_from_json",
    "reports_to_json",
]
