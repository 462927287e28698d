"""Algorithm identifiers, content-adaptive strength policy, shared helpers."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from docmark.classify import BlockClass
from docmark.errors import DimensionMismatch, PayloadMismatch
from docmark.raster_io import WatermarkBits, quantize


class AlgoId(str, enum.Enum):
    ALGO1 = "algo1"  # DWT
    ALGO2 = "algo2"  # SVD
    ALGO3 = "algo3"  # DCT
    ALGO4 = "algo4"  # DWT-SVD
    ALGO5 = "algo5"  # DWT-DCT-SVD

    @property
    def block_side(self) -> int:
        return 256 if self is AlgoId.ALGO1 else 128

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, value) -> "AlgoId":
        if isinstance(value, AlgoId):
            return value
        v = str(value).strip().lower().replace(" ", "").replace("_", "")
        if v.isdigit():
            v = "algo" + v
        try:
            return cls(v)
        except ValueError:
            raise ValueError(f"unknown algorithm {value!r}") from None


_LABELS = {
    AlgoId.ALGO1: "DWT",
    AlgoId.ALGO2: "SVD",
    AlgoId.ALGO3: "DCT",
    AlgoId.ALGO4: "DWT-SVD",
    AlgoId.ALGO5: "DWT-DCT-SVD",
}


@dataclass(frozen=True)
class AlphaPolicy:
    """Embedding strength per block class; non-texture classes are never touched."""

    ct: float = 0.1
    ptpg: float = 0.2
    cg: float = 0.2

    def __post_init__(self):
        for name in ("ct", "ptpg", "cg"):
            a = getattr(self, name)
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"alpha for {name} must lie in [0, 1], got {a}")

    def alpha_for(self, cls: BlockClass) -> float:
        return {
            BlockClass.CT: self.ct,
            BlockClass.PTPG: self.ptpg,
            BlockClass.CG: self.cg,
        }.get(BlockClass(cls), 0.0)

    def to_dict(self) -> dict:
        return {"CT": self.ct, "PTPG": self.ptpg, "CG": self.cg}

    @classmethod
    def from_dict(cls, d: dict) -> "AlphaPolicy":
        return cls(ct=float(d.get("CT", 0.1)), ptpg=float(d.get("PTPG", 0.2)),
                   cg=float(d.get("CG", 0.2)))


def alpha_for(cls: BlockClass, policy: AlphaPolicy = AlphaPolicy()) -> float:
    return policy.alpha_for(cls)


def check_block(block, side: int) -> np.ndarray:
    b = np.asarray(block, dtype=np.float64)
    if b.shape != (side, side):
        raise DimensionMismatch(f"expected a {side}x{side} block, got {b.shape}")
    return b


def mark_array(mark, side: int | None = None) -> np.ndarray:
    w = np.asarray(mark.bits if isinstance(mark, WatermarkBits) else mark, dtype=np.float64)
    if side is not None and w.shape != (side, side):
        raise DimensionMismatch(f"expected a {side}x{side} watermark, got {w.shape}")
    return w


def requantize(x: np.ndarray) -> np.ndarray:
    return quantize(x)


def require(payload: dict, keys, algo: str) -> None:
    if payload.get("algo") != algo:
        raise PayloadMismatch(f"payload belongs to {payload.get('algo')!r}, not {algo!r}")
    missing = [k for k in keys if k not in payload]
    if missing:
        raise PayloadMismatch(f"{algo} payload lacks {missing}")
