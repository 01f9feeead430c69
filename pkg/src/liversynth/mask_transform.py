"""Random geometric transforms of tumor masks with an anatomical placement constraint.

A transformed tumor mask is only accepted when its centroid falls inside a
configurable liver-plausible region and it still overlaps the patient's actual
liver mask. This is what keeps flips/translations from producing mirrored
(situs inversus) anatomy. Placement uses rejection sampling, never clamping,
so accepted placements are not biased toward the region border.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintUnsatisfiableError, EmptyMaskError, EmptyResultError
from .imaging import BinaryMask


@dataclass(frozen=True)
class TransformSpec:
    """One sampled geometric transform. Applied as flips, zoom, rotation, translation.

    Rotation is degrees counter-clockwise about the image center (y-axis down);
    translation is integer pixels, +x right, +y down.
    """

    zoom: float = 1.0
    rotation: float = 0.0
    flip_h: bool = False
    flip_v: bool = False
    dx: int = 0
    dy: int = 0

    def __post_init__(self):
        if self.zoom <= 0:
            raise ValueError("zoom must be > 0")
        if not 0.0 <= self.rotation < 360.0:
            raise ValueError("rotation must be in [0, 360)")

    @property
    def is_identity(self) -> bool:
        return (self.zoom == 1.0 and self.rotation == 0.0 and not self.flip_h
                and not self.flip_v and self.dx == 0 and self.dy == 0)


@dataclass(frozen=True)
class AnatomicalRegion:
    """Axis-aligned placement box in fractions of image width/height.

    The default covers where the liver sits in standard radiological display
    (image-left = patient-right). The numbers are a configurable prior; the
    anatomical guarantee comes from re-checking the predicate, not from them.
    """

    x_min: float = 0.08
    x_max: float = 0.55
    y_min: float = 0.15
    y_max: float = 0.65

    def __post_init__(self):
        if not (0.0 <= self.x_min < self.x_max <= 1.0):
            raise ValueError("need 0 <= x_min < x_max <= 1")
        if not (0.0 <= self.y_min < self.y_max <= 1.0):
            raise ValueError("need 0 <= y_min < y_max <= 1")

    def contains(self, cx: float, cy: float, width: int, height: int) -> bool:
        """Centroid-in-region predicate, region scaled to image dimensions."""
        return (self.x_min * width <= cx <= self.x_max * width
                and self.y_min * height <= cy <= self.y_max * height)


@dataclass(frozen=True)
class TransformRanges:
    """Sampling ranges for TransformSpec. Vertical flips of axial slices are
    anatomically dubious, so they default off."""

    zoom_min: float = 0.8
    zoom_max: float = 1.2
    rotation_max: float = 15.0
    allow_flip_h: bool = True
    allow_flip_v: bool = False
    translate_max: int = 60

    def __post_init__(self):
        if self.zoom_min <= 0 or self.zoom_min > self.zoom_max:
            raise ValueError("need 0 < zoom_min <= zoom_max")
        if self.rotation_max < 0 or self.translate_max < 0:
            raise ValueError("maxima must be >= 0")


def centroid(mask: BinaryMask) -> tuple[float, float]:
    """Arithmetic mean of foreground pixel coordinates (pixel centers at integers)."""
    ys, xs = np.nonzero(mask.pixels)
    if xs.size == 0:
        raise EmptyMaskError("centroid of an empty mask is undefined")
    return float(xs.mean()), float(ys.mean())


def apply_transform(mask: BinaryMask, spec: TransformSpec) -> BinaryMask:
    """Apply flips, then zoom and rotation about the image center, then translation.

    Nearest-neighbor resampling via inverse mapping; pixels mapped from outside
    the source are background. Output dimensions equal input dimensions.
    """
    if mask.area == 0:
        raise EmptyMaskError("cannot transform an empty mask")
    if spec.is_identity:
        return mask
    h, w = mask.pixels.shape
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    xo, yo = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    # invert the forward chain: translation, rotation, zoom, flips
    x = xo - spec.dx
    y = yo - spec.dy
    if spec.rotation != 0.0:
        theta = math.radians(-spec.rotation)
        c, s = math.cos(theta), math.sin(theta)
        rx = x - cx
        ry = y - cy
        x = cx + rx * c + ry * s
        y = cy - rx * s + ry * c
    if spec.zoom != 1.0:
        x = cx + (x - cx) / spec.zoom
        y = cy + (y - cy) / spec.zoom
    if spec.flip_v:
        y = (h - 1) - y
    if spec.flip_h:
        x = (w - 1) - x
    xi = np.floor(x + 0.5).astype(np.int64)
    yi = np.floor(y + 0.5).astype(np.int64)
    inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
    out = np.zeros((h, w), dtype=bool)
    out[inside] = mask.pixels[yi[inside], xi[inside]]
    if not out.any():
        raise EmptyResultError("all foreground pixels left the frame")
    return BinaryMask(out)


def sample_spec(rng: np.random.Generator, ranges: TransformRanges) -> TransformSpec:
    """Draw one TransformSpec. Draw order is fixed so results are reproducible."""
    zoom = float(rng.uniform(ranges.zoom_min, ranges.zoom_max))
    rotation = float(rng.uniform(-ranges.rotation_max, ranges.rotation_max)) % 360.0
    flip_h = bool(rng.integers(0, 2)) if ranges.allow_flip_h else False
    flip_v = bool(rng.integers(0, 2)) if ranges.allow_flip_v else False
    t = ranges.translate_max
    dx = int(rng.integers(-t, t + 1))
    dy = int(rng.integers(-t, t + 1))
    return TransformSpec(zoom=zoom, rotation=rotation, flip_h=flip_h,
                         flip_v=flip_v, dx=dx, dy=dy)


def sample_constrained(
    rng: np.random.Generator,
    mask: BinaryMask,
    ranges: TransformRanges,
    region: AnatomicalRegion,
    liver: BinaryMask,
    max_attempts: int = 1000,
    min_overlap: int = 1,
) -> tuple[TransformSpec, BinaryMask]:
    """Rejection-sample a transform whose output centroid lies in `region` and
    whose overlap with `liver` has at least `min_overlap` pixels."""
    if mask.area == 0 or liver.area == 0:
        raise EmptyMaskError("tumor and liver masks must be non-empty")
    if mask.pixels.shape != liver.pixels.shape:
        raise ValueError("tumor and liver masks must share dimensions")
    h, w = mask.pixels.shape
    for _ in range(max_attempts):
        spec = sample_spec(rng, ranges)
        try:
            moved = apply_transform(mask, spec)
        except EmptyResultError:
            continue
        cx, cy = centroid(moved)
        if not region.contains(cx, cy, w, h):
            continue
        if int(np.count_nonzero(moved.pixels & liver.pixels)) < min_overlap:
            continue
        return spec, moved
    raise ConstraintUnsatisfiableError(
        f"no admissible transform in {max_attempts} attempts; "
        "region and liver configuration may be incompatible")
