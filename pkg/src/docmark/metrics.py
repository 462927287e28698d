"""Objective quality metrics (PSNR, SSIM) and watermark correlation scores."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from docmark.errors import DimensionMismatch, EmptyList, ImageTooSmall
from docmark.raster_io import PageImage, to_luma

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 8
SSIM_K1, SSIM_K2 = 0.01, 0.03
TOP_FRACTION = 0.25


def _pixels(img) -> np.ndarray:
    return img.pixels if isinstance(img, PageImage) else np.asarray(img)


def _luma(img) -> np.ndarray:
    if isinstance(img, PageImage):
        return to_luma(img).pixels.astype(np.float64)
    a = np.asarray(img)
    if a.ndim == 3:
        return to_luma(PageImage.from_float(a)).pixels.astype(np.float64)
    return a.astype(np.float64)


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB against a 255 peak; capped at 100 dB."""
    x, y = _pixels(a), _pixels(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    mse = np.mean((x.astype(np.float64) - y.astype(np.float64)) ** 2)
    if mse == 0:
        return PSNR_CAP_DB
    return float(min(PSNR_CAP_DB, 10.0 * math.log10(255.0 ** 2 / mse)))


def _window_sums(x: np.ndarray, k: int) -> np.ndarray:
    c = np.zeros((x.shape[0] + 1, x.shape[1] + 1))
    c[1:, 1:] = x.cumsum(0).cumsum(1)
    return c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]


def ssim(a, b, window: int = SSIM_WINDOW) -> float:
    """Mean SSIM over all ``window x window`` uniform windows at stride 1."""
    x = _luma(a)
    y = _luma(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    if x.shape[0] < window or x.shape[1] < window:
        raise ImageTooSmall(f"SSIM needs at least {window}x{window} pixels")
    n = float(window * window)
    # subtract a global offset first: keeps the running sums well conditioned
    off = 0.5 * (x.mean() + y.mean())
    x = x - off
    y = y - off
    mx = _window_sums(x, window) / n
    my = _window_sums(y, window) / n
    # no clamping: identical inputs then give identical terms and exactly 1
    vx = _window_sums(x * x, window) / n - mx * mx
    vy = _window_sums(y * y, window) / n - my * my
    cxy = _window_sums(x * y, window) / n - mx * my
    mx = mx + off
    my = my + off
    c1 = (SSIM_K1 * 255) ** 2
    c2 = (SSIM_K2 * 255) ** 2
    smap = ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
    return float(smap.mean())


def nc_block(w, w_e) -> float:
    """Mean-removed Pearson correlation clamped to [0, 1].

    Zero variance in either input yields 0 (no evidence of the mark).
    """
    a = np.asarray(getattr(w, "bits", w), dtype=np.float64)
    b = np.asarray(w_e, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(np.sum(a * a)) * float(np.sum(b * b)))
    if den == 0.0 or not math.isfinite(den):
        return 0.0
    r = float(np.sum(a * b)) / den
    return min(1.0, max(0.0, r))


def top_count(b: int, fraction: float = TOP_FRACTION) -> int:
    return max(1, math.ceil(fraction * b - 1e-12))


def nc_overall(values) -> float:
    """Average of the top 25% (rounded up) of per-block NC values."""
    v = sorted((float(x) for x in values), reverse=True)
    if not v:
        raise EmptyList("no per-block NC values")
    k = top_count(len(v))
    return float(sum(v[:k]) / k)


@dataclass
class NcReport:
    nc_blocks: list = field(default_factory=list)
    block_ids: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.nc_blocks)

    @property
    def nc_overall(self) -> float:
        return nc_overall(self.nc_blocks) if self.nc_blocks else 0.0

    def to_dict(self) -> dict:
        return {
            "nc_blocks": [round(v, 6) for v in self.nc_blocks],
            "block_ids": [list(b) for b in self.block_ids],
            "texture_blocks": self.count,
            "nc_overall": round(self.nc_overall, 6),
        }
