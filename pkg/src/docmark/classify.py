"""Block classification: DCT-energy bands and the two-way histogram classifier."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

B_MAX = 255.0
INK_LEVEL = 128
DEFAULT_PT_COVERAGE = 0.02


class BlockClass(str, enum.Enum):
    CW = "CW"      # completely white
    CB = "CB"      # completely black
    PT = "PT"      # partial (sparse) text
    CT = "CT"      # complete text
    PTPG = "PTPG"  # partial text, partial graphics
    CG = "CG"      # complete graphics

    @property
    def texture(self) -> bool:
        return self in _TEXTURE

    def __str__(self):
        return self.value


_TEXTURE = frozenset({BlockClass.CT, BlockClass.PTPG, BlockClass.CG})


class HistClass(str, enum.Enum):
    TEXT = "Text"
    GRAPHICS = "Graphics"
    NON_TEXTURE = "NonTexture"


@dataclass(frozen=True)
class EnergyThresholds:
    gamma1: float = 0.9
    gamma2: float = 0.7
    gamma3: float = 0.4
    gamma4: float = 0.1
    pt_coverage: float = DEFAULT_PT_COVERAGE

    def __post_init__(self):
        if not (1 > self.gamma1 > self.gamma2 > self.gamma3 > self.gamma4 > 0):
            raise ValueError("thresholds must satisfy 1 > g1 > g2 > g3 > g4 > 0")
        if not 0 <= self.pt_coverage <= 1:
            raise ValueError("pt_coverage must lie in [0, 1]")

    @property
    def levels(self) -> tuple[float, float, float, float]:
        """The absolute thresholds T1..T4 = gamma_i * B_max."""
        return (self.gamma1 * B_MAX, self.gamma2 * B_MAX,
                self.gamma3 * B_MAX, self.gamma4 * B_MAX)


@dataclass(frozen=True)
class HistThresholds:
    tau1: float = 12.0
    tau2: float = 3.0
    tau3: float = 0.5
    eps: float = 1e-8

    def __post_init__(self):
        if not (self.tau1 > self.tau2 > self.tau3 > 0):
            raise ValueError("thresholds must satisfy tau1 > tau2 > tau3 > 0")


def _tile(block) -> np.ndarray:
    b = np.asarray(block, dtype=np.float64)
    if b.ndim == 3:
        from docmark.raster_io import LUMA_WEIGHTS

        b = b @ np.asarray(LUMA_WEIGHTS)
    if b.size == 0:
        raise ValueError("empty block")
    return b


def block_energy(block) -> float:
    """Orthonormal DCT-II DC coefficient divided by sqrt(n*m).

    The DC term of the orthonormal 2-D DCT is ``sum / sqrt(n*m)``, so this
    is the block mean: a constant block of value v has energy v and the
    all-255 block reaches B_max exactly.
    """
    b = _tile(block)
    dc = b.sum() / np.sqrt(b.size)
    return float(dc / np.sqrt(b.size))


def ink_coverage(block) -> float:
    return float(np.mean(_tile(block) < INK_LEVEL))


def classify_energy(block, thresholds: EnergyThresholds = EnergyThresholds()) -> BlockClass:
    e = block_energy(block)
    t1, t2, t3, t4 = thresholds.levels
    if e > t1:
        return BlockClass.CW
    if e < t4:
        return BlockClass.CB
    if e > t2:
        if ink_coverage(block) < thresholds.pt_coverage:
            return BlockClass.PT
        return BlockClass.CT
    if e > t3:
        return BlockClass.PTPG
    return BlockClass.CG


def histogram_score(block, eps: float = 1e-8) -> float:
    """Sum of the L2-normalized 256-bin intensity histogram (L1/L2 ratio)."""
    b = np.clip(np.rint(_tile(block)), 0, 255).astype(np.int64)
    h = np.bincount(b.ravel(), minlength=256).astype(np.float64)
    return float(h.sum() / (np.sqrt(np.sum(h * h)) + eps ** 2))


def classify_histogram(block, thresholds: HistThresholds = HistThresholds()) -> HistClass:
    s = histogram_score(block, thresholds.eps)
    if s > thresholds.tau1 or s < thresholds.tau3:
        return HistClass.NON_TEXTURE
    if s > thresholds.tau2:
        return HistClass.GRAPHICS
    return HistClass.TEXT


def block_stats(block) -> dict:
    b = _tile(block)
    return {"mean": float(b.mean()), "variance": float(b.var())}
