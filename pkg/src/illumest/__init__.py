"""Light direction and bright-region clustering from a single image."""

__version__ = "0.1.0"

from .detect import PixelSet, bright_pixels, mask_to_pixel_set, otsu_threshold, threshold_mask
from .errors import EmptyBrightSetWarning
from .geometry import DirectionEstimate, angle_between_deg, centroid, cosine_similarity, direction, image_center
from .image import decode_image, load_image, synth_blob_scene, synth_uniform_noise_scene, to_grayscale
from .report import AnalysisOptions, IlluminationReport, analyze_array, analyze_image, batch
from .transport import (
    TransportConfig,
    TransportResult,
    WeightedCloud,
    exact_w2_assignment,
    normalize_cloud,
    sample_uniform_reference,
    sinkhorn_divergence,
)

__all__ = [
    "AnalysisOptions",
    "DirectionEstimate",
    "EmptyBrightSetWarning",
    "IlluminationReport",
    "PixelSet",
    "TransportConfig",
    "TransportResult",
    "WeightedCloud",
    "analyze_array",
    "analyze_image",
    "angle_between_deg",
    "batch",
    "bright_pixels",
    "centroid",
    "cosine_similarity",
    "decode_image",
    "direction",
    "exact_w2_assignment",
    "image_center",
    "load_image",
    "mask_to_pixel_set",
    "normalize_cloud",
    "otsu_threshold",
    "sample_uniform_reference",
    "sinkhorn_divergence",
    "synth_blob_scene",
    "synth_uniform_noise_scene",
    "threshold_mask",
    "to_grayscale",
]
