"""Raster decoding, grayscale conversion and synthetic test scenes.

Images are plain numpy arrays: RGB rasters are ``uint8`` of shape
``(height, width, 3)`` and grayscale rasters are ``uint8`` of shape
``(height, width)``. Row index is ``y``, column index is ``x``.
"""
from __future__ import annotations

import io
from os import PathLike

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, InvalidParam

_FORMATS = ("PNG", "JPEG")


def as_rgb(img) -> np.ndarray:
    """Validate an RGB raster and return it as a read-only-safe uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidParam(f"expected RGB raster of shape (h, w, 3), got {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise InvalidParam("RGB channels must lie in 0..255")
        arr = arr.astype(np.uint8)
    return arr


def as_gray(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidParam(f"expected grayscale raster of shape (h, w), got {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise InvalidParam("intensities must lie in 0..255")
        arr = arr.astype(np.uint8)
    return arr


def replicate(gray: np.ndarray) -> np.ndarray:
    """Stack a grayscale raster into three identical channels."""
    gray = as_gray(gray)
    return np.repeat(gray[:, :, None], 3, axis=2)


def _to_rgb_array(im: Image.Image) -> np.ndarray:
    mode = im.mode
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        # 16-bit grayscale; /257 keeps 65535 -> 255 exact
        wide = np.asarray(im, dtype=np.int64)
        gray = (np.clip(wide, 0, 65535) // 257).astype(np.uint8)
        return replicate(gray)
    if mode == "F":
        raise DecodeError("floating-point rasters are not supported")
    if mode in ("1", "L"):
        return replicate(np.asarray(im.convert("L")))
    if mode == "LA":
        return replicate(np.asarray(im.getchannel("L")))
    # P, RGBA, CMYK, YCbCr, ...: alpha is dropped, no compositing
    return np.ascontiguousarray(np.asarray(im.convert("RGBA"))[:, :, :3])


def decode_image(data: bytes) -> np.ndarray:
    """Decode a PNG or JPEG byte stream into an 8-bit RGB raster.

    16-bit grayscale samples are rescaled by integer division by 257,
    grayscale inputs are replicated across channels, and alpha is dropped.

    Raises:
        DecodeError: malformed, truncated or unsupported input.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format not in _FORMATS:
                raise DecodeError(f"unsupported image format {im.format!r}")
            im.load()
            return _to_rgb_array(im)
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError, EOFError) as exc:
        raise DecodeError(f"cannot decode image: {exc}") from exc


def load_image(path: str | PathLike) -> np.ndarray:
    """Read and decode an image file; ``OSError`` propagates for I/O failures."""
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_image(data)


def to_grayscale(img) -> np.ndarray:
    """BT.601 luma, rounded half up: ``round(0.299 R + 0.587 G + 0.114 B)``.

    Evaluated in integer arithmetic so the result is bit-exact.
    """
    rgb = as_rgb(img).astype(np.int32)
    luma = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return np.clip((luma + 500) // 1000, 0, 255).astype(np.uint8)


def encode_png(gray: np.ndarray) -> bytes:
    """Encode an 8-bit grayscale (or RGB) raster as PNG bytes."""
    arr = np.asarray(gray)
    arr = as_gray(arr) if arr.ndim == 2 else as_rgb(arr)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def save_png(path: str | PathLike, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(img))


def synth_blob_scene(width, height, blob_center, blob_sigma, peak=255, background=10):
    """Gaussian highlight on a flat background.

    ``blob_center`` is ``(row, col)`` and may be fractional. Values are
    ``floor(background + (peak - background) * exp(-r^2 / (2 sigma^2)))``;
    flooring keeps every pixel other than an on-grid center strictly below
    ``peak``, so an integer center is the unique argmax.
    """
    width, height = int(width), int(height)
    if width < 1 or height < 1:
        raise InvalidParam("width and height must be >= 1")
    cy, cx = (float(c) for c in blob_center)
    if not (0 <= cy <= height - 1 and 0 <= cx <= width - 1):
        raise InvalidParam(f"blob_center {blob_center} outside a {height}x{width} raster")
    if not blob_sigma > 0:
        raise InvalidParam("blob_sigma must be positive")
    if not (0 <= background < peak <= 255):
        raise InvalidParam("need 0 <= background < peak <= 255")
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    falloff = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * blob_sigma**2))
    vals = np.floor(background + (peak - background) * falloff)
    return np.clip(vals, 0, 255).astype(np.uint8)


def synth_uniform_noise_scene(width, height, n_bright, bright_value=255, background=10, seed=0):
    """Exactly ``n_bright`` distinct bright pixels placed uniformly at random."""
    width, height, n_bright = int(width), int(height), int(n_bright)
    if width < 1 or height < 1:
        raise InvalidParam("width and height must be >= 1")
    if not 0 <= n_bright <= width * height:
        raise InvalidParam(f"n_bright must lie in 0..{width * height}")
    if not (0 <= background < bright_value <= 255):
        raise InvalidParam("need 0 <= background < bright_value <= 255")
    rng = np.random.default_rng(seed)
    flat = np.full(width * height, background, dtype=np.uint8)
    flat[rng.choice(width * height, size=n_bright, replace=False)] = bright_value
    return flat.reshape(height, width)
