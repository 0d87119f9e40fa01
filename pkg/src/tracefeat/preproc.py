"""Colour-space conversion, low-pass filtering and HSV summary statistics.

All planes hold normalised intensities in [0, 1]; 8-bit inputs are divided by
255 once at ingestion (:meth:`ImagePlanes.from_rgb8`).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ContractError

RGB = "RGB"
YCBCR = "YCbCr"
HSV = "HSV"
SPACES = (RGB, YCBCR, HSV)

# tolerance on the [0, 1] check; float filtering can overshoot by a few ulps
_RANGE_TOL = 1e-9


@dataclass(frozen=True)
class ImagePlanes:
    planes: np.ndarray  # (3, height, width)
    space: str = RGB

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        if planes.ndim != 3 or planes.shape[0] != 3:
            raise ContractError(f"expected 3 planes of equal shape, got array of shape {planes.shape}")
        if planes.shape[1] < 1 or planes.shape[2] < 1:
            raise ContractError("image must be at least 1x1")
        if self.space not in SPACES:
            raise ContractError(f"unknown colour space {self.space!r}")
        if planes.min() < -_RANGE_TOL or planes.max() > 1 + _RANGE_TOL:
            raise ContractError("intensities must lie in [0, 1]")
        object.__setattr__(self, "planes", np.clip(planes, 0.0, 1.0))

    @property
    def height(self):
        return self.planes.shape[1]

    @property
    def width(self):
        return self.planes.shape[2]

    @classmethod
    def from_rgb8(cls, array):
        """Build from an ``(H, W, 3)`` uint8 raster."""
        array = np.asarray(array)
        if array.ndim != 3 or array.shape[2] != 3:
            raise ContractError(f"expected an (H, W, 3) raster, got {array.shape}")
        return cls(np.moveaxis(array.astype(np.float64) / 255.0, -1, 0), RGB)


@dataclass(frozen=True)
class HsvStats:
    mu_h: float
    sigma_h: float
    mu_s: float
    sigma_s: float
    mu_v: float
    sigma_v: float


def _require(img: ImagePlanes, space):
    if img.space != space:
        raise ContractError(f"expected a {space} image, got {img.space}")


def rgb_to_ycbcr(img: ImagePlanes) -> ImagePlanes:
    """Full-range BT.601 on normalised values, clamped to [0, 1]."""
    _require(img, RGB)
    r, g, b = img.planes
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 0.5 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 0.5 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return ImagePlanes(np.clip(np.stack([y, cb, cr]), 0.0, 1.0), YCBCR)


def rgb_to_hsv(img: ImagePlanes) -> ImagePlanes:
    """Hexcone HSV with hue scaled to [0, 1); achromatic pixels get hue 0."""
    _require(img, RGB)
    r, g, b = img.planes
    v = np.maximum(np.maximum(r, g), b)
    delta = v - np.minimum(np.minimum(r, g), b)
    s = np.divide(delta, v, out=np.zeros_like(v), where=v > 0)

    safe = np.where(delta > 0, delta, 1.0)
    h = np.where(
        v == r,
        np.mod((g - b) / safe, 6.0),
        np.where(v == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
    ) / 6.0
    h = np.where(delta > 0, h, 0.0)
    h[h >= 1.0] = 0.0
    return ImagePlanes(np.stack([h, s, v]), HSV)


def gaussian_kernel(size=3, sigma=1.0):
    """Normalised ``size x size`` Gaussian weights (``size`` odd)."""
    if size < 1 or size % 2 == 0:
        raise ContractError(f"kernel side must be odd and positive, got {size}")
    if sigma <= 0:
        raise ContractError("sigma must be positive")
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def lowpass(img: ImagePlanes, kernel=None) -> ImagePlanes:
    """Convolve every plane with ``kernel`` (default 3x3 Gaussian, sigma 1), edges replicated."""
    kernel = gaussian_kernel() if kernel is None else np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1] or kernel.shape[0] % 2 == 0:
        raise ContractError(f"kernel must be square with an odd side, got shape {kernel.shape}")
    if abs(kernel.sum() - 1.0) > 1e-9:
        raise ContractError(f"kernel weights must sum to 1 (sum = {kernel.sum():.12g})")
    out = np.stack([ndimage.convolve(p, kernel, mode="nearest") for p in img.planes])
    return ImagePlanes(np.clip(out, 0.0, 1.0), img.space)


def hsv_stats(img: ImagePlanes) -> HsvStats:
    """Per-plane mean and population standard deviation."""
    _require(img, HSV)
    h, s, v = img.planes
    return HsvStats(
        mu_h=float(h.mean()), sigma_h=float(h.std()),
        mu_s=float(s.mean()), sigma_s=float(s.std()),
        mu_v=float(v.mean()), sigma_v=float(v.std()),
    )
