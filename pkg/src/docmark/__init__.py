"""Content-adaptive watermarking of rasterized text-document pages."""

from docmark.raster_io import PageImage, WatermarkBits, DocumentManifest
from docmark.classify import BlockClass
from docmark.algorithms.base import AlgoId, AlphaPolicy

__all__ = [
    "PageImage",
    "WatermarkBits",
    "DocumentManifest",
    "BlockClass",
    "AlgoId",
    "AlphaPolicy",
]

__version__ = "0.1.0"
