"""Tumor/liver intersection and the tumor-over-edges conditioning image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edge_detect import EdgeMap
from .errors import DimensionMismatchError, EmptyTumorError
from .imaging import BinaryMask, GrayImage

BACKGROUND_VALUE = 0
TUMOR_VALUE = 128
EDGE_VALUE = 255


@dataclass(frozen=True)
class ConditioningImage:
    """Three-level image: 0 background, 255 edge, 128 tumor (tumor paints over edges)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if p.ndim != 2:
            raise ValueError("ConditioningImage requires a 2-D array")
        allowed = {BACKGROUND_VALUE, TUMOR_VALUE, EDGE_VALUE}
        if not set(np.unique(p)).issubset(allowed):
            raise ValueError(f"pixel alphabet must be a subset of {sorted(allowed)}")
        p.flags.writeable = False
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def tumor_mask(self) -> BinaryMask:
        return BinaryMask(self.pixels == TUMOR_VALUE)

    def to_gray(self) -> GrayImage:
        return GrayImage(self.pixels)


def intersect(tumor: BinaryMask, liver: BinaryMask) -> BinaryMask:
    """Pixel-wise AND of two same-size masks."""
    if tumor.pixels.shape != liver.pixels.shape:
        raise DimensionMismatchError(
            f"mask dimensions differ: {tumor.pixels.shape} vs {liver.pixels.shape}")
    return BinaryMask(tumor.pixels & liver.pixels)


def overlay(intersection: BinaryMask, edges: EdgeMap) -> ConditioningImage:
    """Paint edges at 255 and the tumor region at 128 on a black background."""
    if intersection.pixels.shape != edges.pixels.shape:
        raise DimensionMismatchError(
            f"dimensions differ: {intersection.pixels.shape} vs {edges.pixels.shape}")
    if intersection.area == 0:
        raise EmptyTumorError("conditioning image requires a non-empty tumor region")
    out = np.zeros(intersection.pixels.shape, dtype=np.uint8)
    out[edges.pixels] = EDGE_VALUE
    out[intersection.pixels] = TUMOR_VALUE
    return ConditioningImage(out)
