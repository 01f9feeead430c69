"""Canny edge extraction with randomly sampled hysteresis thresholds.

The stages are fixed: min-max normalization, 5x5 Gaussian blur (sigma 1.4,
edge-clamped), 3x3 Sobel gradients, direction-quantized non-maximum
suppression, double threshold, and hysteresis by flood fill from strong
pixels. Gradient magnitude is scaled by 1/4 before thresholding so the
sampled 30..120 range is commensurate with 8-bit intensities (raw Sobel on
8-bit data spans roughly 0..1443, which would make that range nearly
always-pass).

All floating-point accumulation happens per pixel in a fixed kernel order,
so the output is bit-identical across runs and thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmallError
from .imaging import GrayImage

THRESHOLD_MIN = 30
THRESHOLD_MAX = 120

DEFAULT_SIGMA = 1.4
DEFAULT_MAGNITUDE_SCALE = 0.25

# direction-bin boundaries: tan(22.5 deg) and tan(67.5 deg)
_TAN_22_5 = math.sqrt(2.0) - 1.0
_TAN_67_5 = math.sqrt(2.0) + 1.0


@dataclass(frozen=True)
class ThresholdPair:
    """Low/high hysteresis thresholds, integers sampled in [30, 120]."""

    low: int
    high: int

    def __post_init__(self):
        if not (THRESHOLD_MIN <= self.low < self.high <= THRESHOLD_MAX):
            raise ValueError(f"need {THRESHOLD_MIN} <= low < high <= {THRESHOLD_MAX}")


@dataclass(frozen=True)
class EdgeMap:
    """Boolean edge raster plus the thresholds that produced it."""

    pixels: np.ndarray
    low: int
    high: int

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels, dtype=bool)
        if p.ndim != 2:
            raise ValueError("EdgeMap requires a 2-D array")
        if not (0 <= self.low < self.high <= 255):
            raise ValueError("need 0 <= low < high <= 255")
        p.flags.writeable = False
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def sample_thresholds(rng: np.random.Generator, count: int) -> list[ThresholdPair]:
    """Draw `count` pairs of distinct uniform integers in [30, 120], low < high."""
    if count < 1:
        raise ValueError("count must be >= 1")
    pairs = []
    for _ in range(count):
        while True:
            a = int(rng.integers(THRESHOLD_MIN, THRESHOLD_MAX + 1))
            b = int(rng.integers(THRESHOLD_MIN, THRESHOLD_MAX + 1))
            if a != b:
                break
        pairs.append(ThresholdPair(low=min(a, b), high=max(a, b)))
    return pairs


def gaussian_kernel(sigma: float = DEFAULT_SIGMA, size: int = 5) -> list[list[float]]:
    """Normalized Gaussian kernel built with scalar math in row-major order.

    Built this way (not with numpy ufuncs) so any scalar re-implementation
    accumulating in the same order produces bit-identical weights.
    """
    half = size // 2
    raw = [[math.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
            for x in range(-half, half + 1)]
           for y in range(-half, half + 1)]
    total = sum(v for row in raw for v in row)
    return [[v / total for v in row] for row in raw]


def _correlate_clamped(field: np.ndarray, kernel: list[list[float]]) -> np.ndarray:
    """Edge-clamped correlation, accumulating kernel taps in row-major order."""
    kh = len(kernel)
    kw = len(kernel[0])
    hh, hw = kh // 2, kw // 2
    padded = np.pad(field, ((hh, hh), (hw, hw)), mode="edge")
    h, w = field.shape
    acc = np.zeros((h, w), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            acc = acc + kernel[u][v] * padded[u:u + h, v:v + w]
    return acc


_SOBEL_X = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]
_SOBEL_Y = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]]


def _normalize(pixels: np.ndarray) -> np.ndarray:
    """Min-max stretch to [0, 255] unless the image already spans it."""
    lo = int(pixels.min())
    hi = int(pixels.max())
    f = pixels.astype(np.float64)
    if lo == 0 and hi == 255:
        return f
    if hi == lo:
        return np.zeros_like(f)
    scale = 255.0 / (hi - lo)
    return (f - lo) * scale


def _quantize_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Quantize gradient direction to bins 0 (0deg), 1 (45), 2 (90), 3 (135).

    Decided by comparing |gy| against |gx|*tan(22.5) and |gx|*tan(67.5);
    diagonal sign from sign(gx*gy). Avoids arctan2 so scalar and vectorized
    code agree bit-for-bit.
    """
    ax = np.abs(gx)
    ay = np.abs(gy)
    bins = np.full(gx.shape, 3, dtype=np.uint8)
    bins[gx * gy > 0] = 1
    bins[ay <= ax * _TAN_22_5] = 0
    bins[ay >= ax * _TAN_67_5] = 2
    return bins


# neighbor offsets (dy1, dx1, dy2, dx2) per direction bin; the tie rule is
# strict > against the first neighbor, >= against the second
_NMS_NEIGHBORS = {
    0: (0, -1, 0, 1),     # horizontal gradient: compare left/right
    1: (-1, -1, 1, 1),    # down-right gradient: up-left / down-right
    2: (-1, 0, 1, 0),     # vertical gradient: up / down
    3: (-1, 1, 1, -1),    # down-left gradient: up-right / down-left
}


def _non_maximum_suppression(mag: np.ndarray, bins: np.ndarray) -> np.ndarray:
    """Zero out non-ridge pixels. The one-pixel border is always suppressed
    (its gradient rests on clamped samples)."""
    out = np.zeros_like(mag)
    center = mag[1:-1, 1:-1]
    keep = np.zeros(center.shape, dtype=bool)
    for b, (dy1, dx1, dy2, dx2) in _NMS_NEIGHBORS.items():
        sel = bins[1:-1, 1:-1] == b
        n1 = mag[1 + dy1:mag.shape[0] - 1 + dy1, 1 + dx1:mag.shape[1] - 1 + dx1]
        n2 = mag[1 + dy2:mag.shape[0] - 1 + dy2, 1 + dx2:mag.shape[1] - 1 + dx2]
        keep |= sel & (center > n1) & (center >= n2)
    out[1:-1, 1:-1] = np.where(keep, center, 0.0)
    return out


def gradient_magnitude(image: GrayImage, sigma: float = DEFAULT_SIGMA,
                       magnitude_scale: float = DEFAULT_MAGNITUDE_SCALE,
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Stages 1-3: normalization, blur, Sobel. Returns (scaled magnitude, direction bins)."""
    f = _normalize(image.pixels)
    blurred = _correlate_clamped(f, gaussian_kernel(sigma))
    gx = _correlate_clamped(blurred, _SOBEL_X)
    gy = _correlate_clamped(blurred, _SOBEL_Y)
    mag = np.sqrt(gx * gx + gy * gy) * magnitude_scale
    return mag, _quantize_direction(gx, gy)


def canny(image: GrayImage, pair: ThresholdPair, sigma: float = DEFAULT_SIGMA,
          magnitude_scale: float = DEFAULT_MAGNITUDE_SCALE) -> EdgeMap:
    """Full edge extraction. Needs at least 5x5 pixels for the blur footprint."""
    if image.width < 5 or image.height < 5:
        raise ImageTooSmallError(
            f"canny needs at least 5x5 pixels, got {image.width}x{image.height}")
    mag, bins = gradient_magnitude(image, sigma, magnitude_scale)
    nms = _non_maximum_suppression(mag, bins)
    strong = nms >= pair.high
    weak = nms >= pair.low
    if not strong.any():
        return EdgeMap(np.zeros_like(weak), low=pair.low, high=pair.high)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    keep_labels = np.unique(labels[strong])
    edges = weak & np.isin(labels, keep_labels)
    return EdgeMap(edges, low=pair.low, high=pair.high)
