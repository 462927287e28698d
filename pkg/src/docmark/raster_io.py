"""Page and watermark raster I/O, luma conversion, document manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from docmark.errors import (
    CorruptImage,
    ImageIOError,
    NotSquare,
    UnsupportedFormat,
)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
WATERMARK_THRESHOLD = 128
MAX_WATERMARK_SIDE = 128

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_PNM_MAGICS = (b"P5", b"P6")
_SUFFIX_FORMAT = {".png": "PNG", ".pgm": "PPM", ".ppm": "PPM", ".pnm": "PPM"}


@dataclass(frozen=True, eq=False)
class PageImage:
    """An 8-bit raster page, shape ``(height, width)`` or ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim not in (2, 3) or (px.ndim == 3 and px.shape[2] != 3):
            raise ValueError(f"unsupported pixel array shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("page must be at least 1x1")
        if px.dtype != np.uint8:
            if np.issubdtype(px.dtype, np.floating) or px.min() < 0 or px.max() > 255:
                raise ValueError("page samples must be 8-bit integers in [0, 255]")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def shape(self) -> tuple:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, PageImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)

    __hash__ = None

    @classmethod
    def from_float(cls, arr: np.ndarray) -> "PageImage":
        """Round half away from zero and clamp to [0, 255]."""
        return cls(quantize(arr))


def quantize(arr: np.ndarray) -> np.ndarray:
    """Round half away from zero, clamp to [0, 255], return uint8."""
    a = np.asarray(arr, dtype=np.float64)
    r = np.sign(a) * np.floor(np.abs(a) + 0.5)
    return np.clip(r, 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class WatermarkBits:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise NotSquare(f"watermark must be square, got shape {b.shape}")
        if not np.isin(b, (0, 1)).all():
            raise ValueError("watermark bits must be 0 or 1")
        b = np.ascontiguousarray(b.astype(np.uint8))
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def side(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, WatermarkBits):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None

    def as_float(self) -> np.ndarray:
        return self.bits.astype(np.float64)


@dataclass
class DocumentManifest:
    id: str
    pages: list[str]
    language: str = ""
    base_dir: Path | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.pages:
            raise ValueError("manifest must list at least one page")
        if len(set(self.pages)) != len(self.pages):
            raise ValueError("manifest page paths must be unique")

    def page_paths(self) -> list[Path]:
        base = self.base_dir or Path(".")
        return [p if p.is_absolute() else base / p for p in map(Path, self.pages)]

    def to_json(self) -> str:
        return json.dumps({"id": self.id, "pages": list(self.pages), "language": self.language}, indent=2)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "DocumentManifest":
        path = Path(path)
        data = json.loads(path.read_text())
        try:
            return cls(id=str(data["id"]), pages=[str(p) for p in data["pages"]],
                       language=str(data.get("language", "")), base_dir=path.parent)
        except KeyError as exc:
            raise ValueError(f"manifest {path} is missing field {exc}") from None

    def load_pages(self) -> list[PageImage]:
        return [load_page(p) for p in self.page_paths()]


def _sniff(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(_PNG_MAGIC):
        return "PNG"
    if head[:2] in _PNM_MAGICS:
        return "PPM"
    raise UnsupportedFormat(f"{path}: only PNG and binary PGM/PPM are supported")


def _to_array(img: Image.Image) -> np.ndarray:
    if img.mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(img).astype(np.uint32)
        return (arr >> 8).clip(0, 255).astype(np.uint8)
    if img.mode in ("1", "L", "P", "LA", "RGB", "RGBA"):
        if img.mode == "P":
            img = img.convert("RGBA" if "transparency" in img.info else "RGB")
        if img.mode == "LA" or img.mode == "1":
            img = img.convert("L")
        if img.mode == "RGBA":
            img = img.convert("RGB")
        return np.asarray(img, dtype=np.uint8)
    raise UnsupportedFormat(f"unsupported image mode {img.mode}")


def load_page(path) -> PageImage:
    """Decode a PNG/PGM/PPM file into a :class:`PageImage`.

    16-bit sources are right-shifted to 8 bits. Raises ``FileNotFoundError``,
    :class:`UnsupportedFormat` or :class:`CorruptImage`.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    _sniff(path)
    try:
        with Image.open(path) as img:
            img.load()
            arr = _to_array(img)
    except UnsupportedFormat:
        raise
    except (OSError, UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise CorruptImage(f"{path}: {exc}") from exc
    return PageImage(arr)


def save_page(page: PageImage, path) -> None:
    """Write a page losslessly; format follows the suffix (.png, .pgm, .ppm)."""
    path = Path(path)
    fmt = _SUFFIX_FORMAT.get(path.suffix.lower())
    if fmt is None:
        raise UnsupportedFormat(f"{path}: lossless output must be .png, .pgm or .ppm")
    if path.suffix.lower() == ".pgm" and page.channels != 1:
        raise UnsupportedFormat("PGM output requires a gray page")
    img = Image.fromarray(page.pixels, mode="L" if page.channels == 1 else "RGB")
    try:
        img.save(path, format=fmt)
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def to_luma(page: PageImage) -> PageImage:
    if page.channels == 1:
        return page
    rgb = page.pixels.astype(np.float64)
    y = rgb[..., 0] * LUMA_WEIGHTS[0] + rgb[..., 1] * LUMA_WEIGHTS[1] + rgb[..., 2] * LUMA_WEIGHTS[2]
    return PageImage.from_float(y)


def load_watermark(path, max_side: int = MAX_WATERMARK_SIDE) -> WatermarkBits:
    page = to_luma(load_page(path))
    if page.width != page.height:
        raise NotSquare(f"{path}: watermark is {page.width}x{page.height}")
    if page.width > max_side:
        raise ValueError(f"{path}: watermark side {page.width} exceeds maximum {max_side}")
    return WatermarkBits((page.pixels >= WATERMARK_THRESHOLD).astype(np.uint8))


def save_watermark(mark: WatermarkBits, path) -> None:
    save_page(PageImage(mark.bits * 255), path)
