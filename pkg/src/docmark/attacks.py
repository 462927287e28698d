"""Digital attack battery: compression, noise, geometry, print-screen surrogate,
stitching and local text edits, plus projection-profile skew estimation.

Every stochastic attack takes an explicit seed and is byte-reproducible.
Rotation angles are counter-clockwise as seen on screen (image y axis down).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from PIL import Image
from scipy.ndimage import affine_transform

from docmark.errors import (ConfigError, DimensionMismatch, HeightMismatch, IndexOutOfRange,
                            InvalidCut, NoContent)
from docmark.page_prep import DEFAULT_CANONICAL, ROBUST_EPS, page_margins
from docmark.raster_io import PageImage, quantize, to_luma

WHITE = 255
INK_LEVEL = 128
SKEW_RANGE = 10.0
SKEW_STEP = 0.05
SKEW_MAX_POINTS = 60000

PRINT_SCREEN = {
    # quality: (scale, JPEG quality)
    "low": (0.8, 40),
    "normal": (1.1, 70),
    "good": (1.25, 90),
}
PRINT_SCREEN_JITTER = 0.3  # degrees


def _image(page: PageImage) -> Image.Image:
    return Image.fromarray(page.pixels, mode="L" if page.channels == 1 else "RGB")


def jpeg_compress(page: PageImage, quality: int) -> PageImage:
    """Baseline JPEG encode at ``quality`` then decode."""
    q = int(quality)
    if not 1 <= q <= 100:
        raise ConfigError(f"JPEG quality must lie in [1, 100], got {quality}")
    buf = io.BytesIO()
    _image(page).save(buf, format="JPEG", quality=q)
    buf.seek(0)
    with Image.open(buf) as im:
        return PageImage(np.array(im))


def add_gaussian_noise(page: PageImage, sigma: float, seed: int = 0) -> PageImage:
    """Add zero-mean Gaussian noise of *variance* ``sigma``, then round and clamp."""
    if sigma < 0:
        raise ConfigError("noise variance must be >= 0")
    if sigma == 0:
        return page
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(sigma), size=page.pixels.shape)
    return PageImage(quantize(page.pixels.astype(np.float64) + noise))


def _rotate_array(a: np.ndarray, degrees: float, cval: float = WHITE) -> np.ndarray:
    h, w = a.shape[:2]
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    # output (row, col) -> input (row, col); inverse of a CCW turn about the centre
    mat = np.array([[c, s], [-s, c]])
    centre = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    offset = centre - mat @ centre
    def one(ch):
        return affine_transform(ch.astype(np.float64), mat, offset=offset, order=1,
                                mode="constant", cval=cval)
    if a.ndim == 2:
        return one(a)
    return np.stack([one(a[..., k]) for k in range(a.shape[2])], axis=-1)


def rotate(page: PageImage, degrees: float) -> PageImage:
    """Rotate about the page centre with bilinear resampling and white fill."""
    if abs(degrees) > 45:
        raise ConfigError("rotation is limited to |degrees| <= 45")
    if degrees == 0:
        return page
    return PageImage(quantize(_rotate_array(page.pixels, degrees)))


def _ink_points(page: PageImage):
    y = to_luma(page).pixels
    rows, cols = np.nonzero(y < INK_LEVEL)
    return rows.astype(np.float64), cols.astype(np.float64), y.shape


def detect_skew(page: PageImage, max_angle: float = SKEW_RANGE, step: float = SKEW_STEP) -> float:
    """Skew angle (degrees, same sense as :func:`rotate`) by projection-profile search.

    For each candidate the ink pixels are rotated back and binned into
    one-pixel rows; the angle giving the sharpest profile (largest sum of
    squared bin counts) wins.
    """
    rows, cols, (h, w) = _ink_points(page)
    if rows.size < 0.001 * h * w or rows.size < 50:
        raise NoContent("page has too little ink for skew detection")
    if rows.size > SKEW_MAX_POINTS:
        keep = np.linspace(0, rows.size - 1, SKEW_MAX_POINTS).astype(np.int64)
        rows, cols = rows[keep], cols[keep]
    y = rows - (h - 1) / 2.0
    x = cols - (w - 1) / 2.0
    n = int(round(max_angle / step))
    angles = np.arange(-n, n + 1) * step
    span = int(math.ceil(math.hypot(h, w))) + 2
    best, best_score = 0.0, -1.0
    for a in angles:
        t = math.radians(a)
        # undo a CCW turn of ``a``: y_orig = x' sin a + y' cos a
        yy = np.floor(x * math.sin(t) + y * math.cos(t) + span / 2).astype(np.int64)
        score = float(np.sum(np.bincount(yy, minlength=span).astype(np.float64) ** 2))
        if score > best_score + 1e-9:
            best, best_score = float(a), score
    return round(best, 6)


def correct_skew(page: PageImage) -> PageImage:
    return rotate(page, -detect_skew(page))


def scale(page: PageImage, fx: float, fy: float | None = None) -> PageImage:
    """Bilinear rescale to ``round(fx * width) x round(fy * height)``."""
    fy = fx if fy is None else fy
    if fx <= 0 or fy <= 0:
        raise ConfigError("scale factors must be positive")
    size = (max(1, int(round(page.width * fx))), max(1, int(round(page.height * fy))))
    if size == (page.width, page.height):
        return page
    return PageImage(np.array(_image(page).resize(size, Image.BILINEAR)))


def crop_rect(page: PageImage, top: int, left: int, height: int, width: int) -> PageImage:
    if top < 0 or left < 0 or height < 1 or width < 1 or \
            top + height > page.height or left + width > page.width:
        raise InvalidCut(f"crop rectangle ({top},{left},{height},{width}) leaves the page")
    return PageImage(page.pixels[top:top + height, left:left + width].copy())


def print_screen_sim(page: PageImage, quality: str = "normal", seed: int = 0) -> PageImage:
    """Screen-capture surrogate: slight rotation, rescale, JPEG re-encode."""
    try:
        factor, q = PRINT_SCREEN[str(quality).lower()]
    except KeyError:
        raise ConfigError(f"print-screen quality must be one of {sorted(PRINT_SCREEN)}") from None
    rng = np.random.default_rng(seed)
    angle = float(rng.uniform(-PRINT_SCREEN_JITTER, PRINT_SCREEN_JITTER))
    out = rotate(page, angle)
    out = scale(out, factor)
    return jpeg_compress(out, q)


def _fit(a: np.ndarray, h: int, w: int) -> np.ndarray:
    out = np.full((h, w) + a.shape[2:], WHITE, dtype=np.uint8)
    hh, ww = min(h, a.shape[0]), min(w, a.shape[1])
    out[:hh, :ww] = a[:hh, :ww]
    return out


def stitch_columns(page: PageImage, cut_columns, gap_delta: int = 0, line_shift: int = 0) -> PageImage:
    """Cut the page at ``cut_columns`` and paste the pieces back with the gap at
    every cut changed by ``gap_delta`` px; each further piece is also moved
    down by ``line_shift`` px (|shift| <= 3). The result is padded or cropped
    back to the input size with white.
    """
    cuts = sorted(int(c) for c in cut_columns)
    w, h = page.width, page.height
    if abs(line_shift) > 3:
        raise ConfigError("line shift is limited to 3 px")
    if any(c <= 0 or c >= w for c in cuts) or len(set(cuts)) != len(cuts):
        raise InvalidCut(f"cut columns {cuts} must be distinct and strictly inside 0..{w}")
    bounds = [0] + cuts + [w]
    px = page.pixels
    pieces = [px[:, a:b] for a, b in zip(bounds[:-1], bounds[1:])]
    out = [pieces[0]]
    for k, p in enumerate(pieces[1:], start=1):
        if gap_delta < 0:
            if -gap_delta >= p.shape[1]:
                raise InvalidCut(f"piece {k} is narrower than the gap reduction")
            p = p[:, -gap_delta:]
        elif gap_delta > 0:
            out.append(np.full((h, gap_delta) + px.shape[2:], WHITE, dtype=np.uint8))
        if line_shift:
            moved = np.full_like(p, WHITE)
            s = line_shift * k
            s = max(-3, min(3, s))
            if s > 0:
                moved[s:] = p[:-s]
            else:
                moved[:s] = p[-s:]
            p = moved
        out.append(p)
    return PageImage(_fit(np.concatenate(out, axis=1), h, w))


def stitch_pages(page_a: PageImage, page_b: PageImage) -> PageImage:
    """Squeeze each page to half width and place them side by side.

    Both halves are ``width // 2`` wide; an odd width leaves one white column
    on the right.
    """
    if page_a.height != page_b.height:
        raise HeightMismatch(f"page heights differ: {page_a.height} vs {page_b.height}")
    if page_a.channels != page_b.channels:
        raise DimensionMismatch("pages must have the same channel count")
    w, h = page_a.width, page_a.height
    left = np.array(_image(page_a).resize((w // 2, h), Image.BILINEAR))
    right = np.array(_image(page_b).resize((w // 2, h), Image.BILINEAR))
    return PageImage(_fit(np.concatenate([left, right], axis=1), h, w))


@dataclass(frozen=True)
class PageGrid:
    """Block layout of a page in its own pixel coordinates."""

    top: int
    left: int
    block_h: float
    block_w: float
    rows: int
    cols: int

    def __len__(self):
        return self.rows * self.cols

    def region(self, i: int) -> tuple[slice, slice]:
        if not 0 <= i < len(self):
            raise IndexOutOfRange(f"block {i} outside 0..{len(self) - 1}")
        r, c = divmod(i, self.cols)
        return (slice(self.top + int(round(r * self.block_h)), self.top + int(round((r + 1) * self.block_h))),
                slice(self.left + int(round(c * self.block_w)), self.left + int(round((c + 1) * self.block_w))))


def page_grid(page: PageImage, block_side: int, canonical=DEFAULT_CANONICAL,
              eps: float = ROBUST_EPS) -> PageGrid:
    m = page_margins(page, eps)
    ch, cw = page.height - m.d_t - m.d_b, page.width - m.d_l - m.d_r
    rows, cols = canonical[0] // block_side, canonical[1] // block_side
    return PageGrid(top=m.d_t, left=m.d_l, block_h=ch / rows, block_w=cw / cols, rows=rows, cols=cols)


EDIT_KINDS = ("strike", "highlight", "wordswap")
HIGHLIGHT_RGB = (255, 240, 120)


def _text_lines(luma: np.ndarray, min_frac: float = 0.02):
    """Row spans (start, stop) whose ink fraction exceeds ``min_frac``."""
    on = np.mean(luma < INK_LEVEL, axis=1) > min_frac
    spans, start = [], None
    for i, v in enumerate(on):
        if v and start is None:
            start = i
        elif not v and start is not None:
            spans.append((start, i))
            start = None
    if start is not None:
        spans.append((start, len(on)))
    return [s for s in spans if s[1] - s[0] >= 3]


def block_edit(page: PageImage, grid: PageGrid, indices, kind: str = "strike", *, seed: int = 0,
               span: tuple[float, float] = (0.0, 1.0), max_lines: int | None = None) -> PageImage:
    """Local text alteration on the given blocks.

    ``strike`` draws 2-px black lines through the middle of the text lines
    (limited to the horizontal fraction ``span`` and at most ``max_lines``
    lines); ``highlight`` multiplies the block by a light marker colour;
    ``wordswap`` copies a word-sized patch from elsewhere in the block.
    """
    kind = kind.lower().replace("-", "").replace("_", "")
    kind = {"strikethrough": "strike", "word": "wordswap"}.get(kind, kind)
    if kind not in EDIT_KINDS:
        raise ConfigError(f"edit kind must be one of {EDIT_KINDS}")
    idx = list(indices)
    for i in idx:
        if not 0 <= int(i) < len(grid):
            raise IndexOutOfRange(f"block {i} outside 0..{len(grid) - 1}")
    if not idx:
        return page
    rng = np.random.default_rng(seed)
    px = page.pixels.copy()
    luma = to_luma(page).pixels
    for i in idx:
        rs, cs = grid.region(int(i))
        blk = px[rs, cs]
        bl = luma[rs, cs]
        bh, bw = bl.shape
        if kind == "strike":
            c0, c1 = int(span[0] * bw), max(int(span[1] * bw), int(span[0] * bw) + 1)
            lines = _text_lines(bl[:, c0:c1])
            if max_lines is not None:
                lines = lines[:max_lines]
            for a, b in lines:
                mid = (a + b) // 2
                blk[mid:mid + 2, c0:c1] = 0
        elif kind == "highlight":
            tone = np.array(HIGHLIGHT_RGB if blk.ndim == 3 else
                            [sum(t * wgt for t, wgt in zip(HIGHLIGHT_RGB, (0.299, 0.587, 0.114)))])
            f = blk.astype(np.float64) * (tone / 255.0 if blk.ndim == 3 else tone[0] / 255.0)
            blk[...] = quantize(f)
        else:
            ph, pw = max(8, bh // 8), max(16, bw // 4)
            sy, sx = int(rng.integers(0, bh - ph + 1)), int(rng.integers(0, bw - pw + 1))
            dy, dx = int(rng.integers(0, bh - ph + 1)), int(rng.integers(0, bw - pw + 1))
            patch = blk[sy:sy + ph, sx:sx + pw].copy()
            blk[dy:dy + ph, dx:dx + pw] = patch
        px[rs, cs] = blk
    return PageImage(px)


KINDS = ("jpeg", "noise", "rotate", "scale", "crop", "print_screen", "stitch_columns",
         "stitch_pages", "block_edit", "none")


@dataclass
class AttackSpec:
    """An attack plus its parameters; applies to a list of pages.

    ``stitch_pages`` consumes pages pairwise (an odd last page is kept).
    ``rotate`` accepts ``correct=True`` to run skew correction afterwards.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.kind = self.kind.lower()
        if self.kind not in KINDS:
            raise ConfigError(f"unknown attack kind {self.kind!r}; choose from {KINDS}")

    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"

    def apply_page(self, page: PageImage, index: int = 0) -> PageImage:
        p, seed = self.params, self.seed + index
        k = self.kind
        if k == "none":
            return page
        if k == "jpeg":
            return jpeg_compress(page, p.get("quality", p.get("q", 75)))
        if k == "noise":
            return add_gaussian_noise(page, float(p.get("sigma", 1.0)), seed)
        if k == "rotate":
            out = rotate(page, float(p.get("degrees", 1.0)))
            return correct_skew(out) if p.get("correct") else out
        if k == "scale":
            return scale(page, float(p.get("fx", 1.0)), p.get("fy"))
        if k == "crop":
            return crop_rect(page, int(p["top"]), int(p["left"]), int(p["height"]), int(p["width"]))
        if k == "print_screen":
            return print_screen_sim(page, p.get("quality", "normal"), seed)
        if k == "stitch_columns":
            cuts = p.get("cut_columns")
            if cuts is None:
                cuts = [page.width // 2]
            return stitch_columns(page, cuts, int(p.get("gap_delta", 0)), int(p.get("line_shift", 0)))
        if k == "block_edit":
            grid = page_grid(page, int(p.get("block_side", 128)))
            return block_edit(page, grid, p.get("indices", []), p.get("edit", "strike"), seed=seed,
                              span=tuple(p.get("span", (0.0, 1.0))), max_lines=p.get("max_lines"))
        raise ConfigError(f"{k} needs two pages; use apply()")

    def apply(self, pages) -> list:
        pages = list(pages)
        if self.kind == "stitch_pages":
            out = [stitch_pages(pages[i], pages[i + 1]) for i in range(0, len(pages) - 1, 2)]
            if len(pages) % 2:
                out.append(pages[-1])
            return out
        return [self.apply_page(pg, i) for i, pg in enumerate(pages)]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "AttackSpec":
        if "kind" not in d:
            raise ConfigError("attack spec needs a 'kind'")
        params = d.get("params")
        if params is None:
            params = {k: v for k, v in d.items() if k not in ("kind", "seed")}
        return cls(kind=d["kind"], params=dict(params), seed=int(d.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> "AttackSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"attack spec is not valid JSON: {exc}") from exc


def standard_battery(seed: int = 0) -> list[AttackSpec]:
    """JPEG, noise, corrected rotation and print-screen grid used for rankings."""
    out = [AttackSpec("jpeg", {"quality": q}, seed) for q in (10, 50, 90)]
    out += [AttackSpec("noise", {"sigma": s}, seed) for s in (0.1, 1.0, 10.0)]
    out += [AttackSpec("rotate", {"degrees": d, "correct": True}, seed) for d in (1.0, 5.0, 10.0)]
    out += [AttackSpec("print_screen", {"quality": q}, seed) for q in ("low", "normal", "good")]
    return out
