"""Exception hierarchy shared by every module."""


class DocmarkError(Exception):
    """Base class for all library errors."""


# raster_io
class UnsupportedFormat(DocmarkError):
    pass


class CorruptImage(DocmarkError):
    pass


class NotSquare(DocmarkError):
    pass


class ImageIOError(DocmarkError):
    pass


# page_prep
class PageTooSmall(DocmarkError):
    pass


class NoContent(DocmarkError):
    """Raised when a page (or gradient map) carries no detectable ink."""


class EmptyCrop(DocmarkError):
    pass


class InvalidCanonicalDims(DocmarkError):
    pass


class NonDivisibleDims(DocmarkError):
    pass


class InconsistentGrid(DocmarkError):
    pass


# transforms
class NonDyadicDims(DocmarkError):
    pass


class ConvergenceFailure(DocmarkError):
    pass


class NonPositiveWeight(DocmarkError):
    pass


# watermark_algos
class DimensionMismatch(DocmarkError):
    pass


class PayloadMismatch(DocmarkError):
    pass


class InsufficientAC(DocmarkError):
    pass


class NoTextureBlocks(DocmarkError):
    pass


class SideInfoMismatch(DocmarkError):
    pass


# quality_metrics
class ImageTooSmall(DocmarkError):
    pass


class ConstantInput(DocmarkError):
    pass


class EmptyList(DocmarkError):
    pass


# attack_sim
class InvalidCut(DocmarkError):
    pass


class HeightMismatch(DocmarkError):
    pass


class IndexOutOfRange(DocmarkError):
    pass


# fingerprint
class BoundUnsatisfiable(DocmarkError):
    pass


class ConfigError(DocmarkError):
    """Invalid run configuration (CLI exit code 2)."""
