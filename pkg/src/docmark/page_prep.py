"""Margin detection, cropping, size normalization and block tiling.

All dimensions are given numpy-style as ``(height, width)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from docmark.errors import (
    EmptyCrop,
    InconsistentGrid,
    InvalidCanonicalDims,
    NoContent,
    NonDivisibleDims,
    PageTooSmall,
)
from docmark.raster_io import PageImage, quantize

DEFAULT_EPS = 32.0
# Threshold used by the watermarking pipeline. Solid ink and rule edges
# respond around 800, while JPEG ringing at Q=10 next to a rule can exceed
# 200; at 400 neither heavy compression nor additive noise moves the crop box.
ROBUST_EPS = 400.0
DEFAULT_CANONICAL = (1280, 1024)

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()


@dataclass(frozen=True)
class Margins:
    d_l: int
    d_r: int
    d_t: int
    d_b: int

    def __post_init__(self):
        if min(self.d_l, self.d_r, self.d_t, self.d_b) < 0:
            raise ValueError("margins must be non-negative")

    def valid_for(self, height: int, width: int) -> bool:
        return self.d_l + self.d_r < width and self.d_t + self.d_b < height

    def as_dict(self) -> dict:
        return {"d_l": self.d_l, "d_r": self.d_r, "d_t": self.d_t, "d_b": self.d_b}


@dataclass
class BlockGrid:
    """A cropped page partitioned row-major into ``block_h x block_w`` tiles."""

    block_h: int
    block_w: int
    rows: int
    cols: int
    blocks: list = field(repr=False)

    @property
    def height(self) -> int:
        return self.rows * self.block_h

    @property
    def width(self) -> int:
        return self.cols * self.block_w

    def __len__(self):
        return len(self.blocks)

    def index(self, r: int, c: int) -> int:
        return r * self.cols + c

    def region(self, i: int) -> tuple[slice, slice]:
        r, c = divmod(i, self.cols)
        return (slice(r * self.block_h, (r + 1) * self.block_h),
                slice(c * self.block_w, (c + 1) * self.block_w))


def _gray_array(page) -> np.ndarray:
    arr = page.pixels if isinstance(page, PageImage) else np.asarray(page)
    if arr.ndim != 2:
        raise ValueError("expected a single-channel page")
    return arr


def sobel_magnitude(page) -> np.ndarray:
    """Unthresholded Sobel gradient magnitude with edge-replicated borders."""
    p = _gray_array(page).astype(np.float64)
    if p.shape[0] < 3 or p.shape[1] < 3:
        raise PageTooSmall(f"Sobel needs at least 3x3 pixels, got {p.shape}")
    q = np.pad(p, 1, mode="edge")
    h, w = p.shape
    # separable form: smoothing [1,2,1] across, difference [-1,0,1] along
    dx = q[:, 2:] - q[:, :-2]
    gx = dx[:-2] + 2.0 * dx[1:-1] + dx[2:]
    dy = q[2:, :] - q[:-2, :]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    assert gx.shape == (h, w) and gy.shape == (h, w)
    return np.hypot(gx, gy)


def detect_margins(grad: np.ndarray, eps: float = DEFAULT_EPS) -> Margins:
    """Distance from each page edge to the first row/column with gradient > eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    hot = np.asarray(grad) > eps
    cols = np.flatnonzero(hot.any(axis=0))
    rows = np.flatnonzero(hot.any(axis=1))
    if cols.size == 0:
        raise NoContent("no gradient response above threshold")
    h, w = hot.shape
    return Margins(d_l=int(cols[0]), d_r=int(w - 1 - cols[-1]),
                   d_t=int(rows[0]), d_b=int(h - 1 - rows[-1]))


def page_margins(page: PageImage, eps: float = DEFAULT_EPS) -> Margins:
    from docmark.raster_io import to_luma

    return detect_margins(sobel_magnitude(to_luma(page)), eps)


def crop(page: PageImage, margins: Margins) -> PageImage:
    h, w = page.height, page.width
    if not margins.valid_for(h, w):
        raise EmptyCrop(f"margins {margins.as_dict()} leave nothing of a {h}x{w} page")
    px = page.pixels[margins.d_t:h - margins.d_b, margins.d_l:w - margins.d_r]
    return PageImage(px.copy())


def bilinear_resize(arr: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Corner-aligned bilinear resize of a 2-D or HxWxC array; returns float64.

    Destination sample ``d`` reads source coordinate ``d * (S - 1) / (D - 1)``.
    """
    a = np.asarray(arr, dtype=np.float64)
    out_h, out_w = dims
    if out_h < 1 or out_w < 1:
        raise ValueError("target dimensions must be positive")

    def axis_weights(src: int, dst: int):
        if dst == 1 or src == 1:
            pos = np.zeros(dst)
        else:
            pos = np.arange(dst) * ((src - 1) / (dst - 1))
        lo = np.minimum(np.floor(pos).astype(np.int64), src - 1)
        hi = np.minimum(lo + 1, src - 1)
        frac = pos - lo
        return lo, hi, frac

    lo, hi, f = axis_weights(a.shape[0], out_h)
    fr = f.reshape((-1,) + (1,) * (a.ndim - 1))
    tmp = a[lo] * (1.0 - fr) + a[hi] * fr
    lo, hi, f = axis_weights(a.shape[1], out_w)
    fc = f.reshape((1, -1) + (1,) * (a.ndim - 2))
    return tmp[:, lo] * (1.0 - fc) + tmp[:, hi] * fc


def normalize_size(page: PageImage, canonical: tuple[int, int] = DEFAULT_CANONICAL,
                   block_side: int | None = None) -> PageImage:
    """Bilinear-resize ``page`` to ``canonical`` (height, width); identity if equal."""
    ch, cw = canonical
    if ch < 1 or cw < 1:
        raise InvalidCanonicalDims(f"canonical dims {canonical} must be positive")
    if block_side is not None and (ch % block_side or cw % block_side):
        raise InvalidCanonicalDims(
            f"canonical dims {canonical} are not multiples of block side {block_side}")
    if (page.height, page.width) == (ch, cw):
        return page
    return PageImage.from_float(bilinear_resize(page.pixels, (ch, cw)))


def segment(page, n: int, m: int | None = None) -> BlockGrid:
    """Tile a page into ``n x m`` blocks in row-major order."""
    m = n if m is None else m
    arr = page.pixels if isinstance(page, PageImage) else np.asarray(page)
    h, w = arr.shape[:2]
    if n < 1 or m < 1 or h % n or w % m:
        raise NonDivisibleDims(f"page {h}x{w} is not divisible into {n}x{m} blocks")
    rows, cols = h // n, w // m
    blocks = [arr[r * n:(r + 1) * n, c * m:(c + 1) * m].copy()
              for r in range(rows) for c in range(cols)]
    return BlockGrid(block_h=n, block_w=m, rows=rows, cols=cols, blocks=blocks)


def reassemble_array(grid: BlockGrid) -> np.ndarray:
    if len(grid.blocks) != grid.rows * grid.cols:
        raise InconsistentGrid(
            f"expected {grid.rows * grid.cols} blocks, found {len(grid.blocks)}")
    first = np.asarray(grid.blocks[0])
    out = np.empty((grid.height, grid.width) + first.shape[2:], dtype=first.dtype)
    for i, blk in enumerate(grid.blocks):
        blk = np.asarray(blk)
        if blk.shape[:2] != (grid.block_h, grid.block_w) or blk.shape[2:] != first.shape[2:]:
            raise InconsistentGrid(f"block {i} has shape {blk.shape}")
        out[grid.region(i)] = blk
    return out


def reassemble(grid: BlockGrid) -> PageImage:
    """Exact inverse of :func:`segment`."""
    out = reassemble_array(grid)
    if out.dtype != np.uint8:
        out = quantize(out)
    return PageImage(out)
