"""Raster types, lossless PNG I/O, and deterministic resizing.

Everything downstream works on two currencies: 8-bit grayscale images and
boolean masks, both row-major numpy arrays. PNG is the only interchange
format (the source dataset format is undocumented; PNG is our assumption).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError

MASK_THRESHOLD = 127  # intensity > 127 means foreground


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster. ``pixels`` is (height, width) uint8, read-only."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("GrayImage requires a 2-D array with positive dimensions")
        p.flags.writeable = False
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True)
class BinaryMask:
    """Boolean raster, True = foreground. ``pixels`` is (height, width) bool, read-only."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels, dtype=bool)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("BinaryMask requires a 2-D array with positive dimensions")
        p.flags.writeable = False
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.pixels))

    def to_gray(self) -> GrayImage:
        return GrayImage(np.where(self.pixels, 255, 0).astype(np.uint8))

    def __eq__(self, other):
        return isinstance(other, BinaryMask) and np.array_equal(self.pixels, other.pixels)


def _to_uint8(img: Image.Image) -> np.ndarray:
    """Collapse any supported PIL mode to an 8-bit grayscale array."""
    if img.mode in ("L", "1"):
        return np.asarray(img.convert("L"), dtype=np.uint8)
    if img.mode in ("I", "I;16", "I;16B", "I;16L"):
        # 16-bit clinical exports: 65535/257 == 255 exactly.
        a = np.asarray(img, dtype=np.uint32)
        return (a // 257).astype(np.uint8)
    if img.mode == "P":
        img = img.convert("RGB")
    if img.mode in ("RGB", "RGBA"):
        a = np.asarray(img.convert("RGB"), dtype=np.uint32)
        # integer BT.601 luma; avoids floating-point drift across platforms
        luma = (77 * a[..., 0] + 150 * a[..., 1] + 29 * a[..., 2]) >> 8
        return luma.astype(np.uint8)
    raise DecodeError(f"unsupported PNG color mode {img.mode!r}")


def load_png(path: str | os.PathLike, as_mask: bool = False) -> GrayImage | BinaryMask:
    """Load a PNG as a GrayImage, or as a BinaryMask thresholded at >127."""
    try:
        with Image.open(path) as img:
            if img.format != "PNG":
                raise DecodeError(f"{path}: not a PNG file (format={img.format})")
            arr = _to_uint8(img)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as e:
        raise DecodeError(f"{path}: {e}") from e
    if as_mask:
        return BinaryMask(arr > MASK_THRESHOLD)
    return GrayImage(arr)


def save_png(image: GrayImage | BinaryMask, path: str | os.PathLike) -> None:
    """Write as 8-bit grayscale PNG. Masks are stored as {0, 255}."""
    if isinstance(image, BinaryMask):
        image = image.to_gray()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    Image.fromarray(image.pixels, mode="L").save(path, format="PNG")


def _source_coords(n_dst: int, n_src: int) -> np.ndarray:
    """Half-pixel-center mapping: dst index i -> source coordinate (i+0.5)*scale - 0.5."""
    scale = n_src / n_dst
    return (np.arange(n_dst) + 0.5) * scale - 0.5


def resize(image: GrayImage, w: int, h: int, mode: str = "bilinear") -> GrayImage:
    """Resize to w x h. Bilinear is edge-clamped; nearest rounds half-up."""
    if w < 1 or h < 1:
        raise ValueError("target dimensions must be >= 1")
    if mode not in ("bilinear", "nearest"):
        raise ValueError(f"unknown resize mode {mode!r}")
    src = image.pixels
    sh, sw = src.shape
    if (w, h) == (sw, sh):
        return image
    xs = _source_coords(w, sw)
    ys = _source_coords(h, sh)
    if mode == "nearest":
        xi = np.clip(np.floor(xs + 0.5).astype(np.int64), 0, sw - 1)
        yi = np.clip(np.floor(ys + 0.5).astype(np.int64), 0, sh - 1)
        return GrayImage(src[np.ix_(yi, xi)])
    xs = np.clip(xs, 0.0, sw - 1.0)
    ys = np.clip(ys, 0.0, sh - 1.0)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, sw - 1)
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    y1 = np.minimum(y0 + 1, sh - 1)
    fx = (xs - x0)[np.newaxis, :]
    fy = (ys - y0)[:, np.newaxis]
    f = src.astype(np.float64)
    top = f[np.ix_(y0, x0)] * (1.0 - fx) + f[np.ix_(y0, x1)] * fx
    bot = f[np.ix_(y1, x0)] * (1.0 - fx) + f[np.ix_(y1, x1)] * fx
    out = top * (1.0 - fy) + bot * fy
    return GrayImage(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def resize_mask(mask: BinaryMask, w: int, h: int) -> BinaryMask:
    """Masks resize through their {0,255} image form with nearest, then re-threshold."""
    g = resize(mask.to_gray(), w, h, mode="nearest")
    return BinaryMask(g.pixels > MASK_THRESHOLD)
