"""Side information needed for non-blind extraction, and its JSON form.

Arrays are stored as base64 of their little-endian bytes (float64 or int64)
together with the shape, so a save/load cycle is bit-exact.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from docmark.algorithms.base import AlgoId, AlphaPolicy
from docmark.classify import BlockClass, EnergyThresholds
from docmark.errors import SideInfoMismatch
from docmark.page_prep import Margins

SCHEMA = "sideinfo_v1"


def encode_array(a: np.ndarray) -> dict:
    a = np.asarray(a)
    if a.dtype.kind in "iub":
        kind, arr = "<i8", a.astype("<i8")
    else:
        kind, arr = "<f8", a.astype("<f8")
    return {"__ndarray__": base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode("ascii"),
            "dtype": kind, "shape": list(a.shape)}


def decode_array(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["__ndarray__"])
    return np.frombuffer(raw, dtype=d["dtype"]).reshape(d["shape"]).astype(d["dtype"][1:])


def _pack(obj):
    if isinstance(obj, np.ndarray):
        return encode_array(obj)
    if isinstance(obj, dict):
        return {str(k): _pack(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pack(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _unpack(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return decode_array(obj)
        return {k: _unpack(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unpack(v) for v in obj]
    return obj


@dataclass
class BlockSide:
    index: int
    cls: BlockClass
    alpha: float
    payload: dict | None = None


@dataclass
class PageSide:
    """Per-page record; ``margins`` is None for pages with no detectable content."""

    margins: Margins | None
    crop_dims: tuple[int, int] | None
    classes: list = field(default_factory=list)
    blocks: list = field(default_factory=list)  # BlockSide, texture blocks only

    def payload_for(self, index: int) -> BlockSide | None:
        for b in self.blocks:
            if b.index == index:
                return b
        return None


@dataclass
class SideInfo:
    algo: AlgoId
    canonical: tuple[int, int]
    block_side: int
    policy: AlphaPolicy
    thresholds: EnergyThresholds
    eps: float
    mark: np.ndarray
    params: dict = field(default_factory=dict)
    pages: list = field(default_factory=list)

    @property
    def texture_blocks(self) -> int:
        return sum(len(p.blocks) for p in self.pages)

    def check_algo(self, algo) -> None:
        algo = AlgoId.parse(algo)
        if algo is not self.algo:
            raise SideInfoMismatch(f"side information was made by {self.algo.value}, not {algo.value}")
        for p in self.pages:
            for b in p.blocks:
                if b.payload is not None and b.payload.get("algo") != self.algo.value:
                    raise SideInfoMismatch(f"block {b.index} carries a {b.payload.get('algo')} payload")

    def to_dict(self) -> dict:
        t = self.thresholds
        return {
            "schema": SCHEMA,
            "algo": self.algo.value,
            "canonical": list(self.canonical),
            "block_side": self.block_side,
            "policy": self.policy.to_dict(),
            "gamma": [t.gamma1, t.gamma2, t.gamma3, t.gamma4],
            "pt_coverage": t.pt_coverage,
            "eps": self.eps,
            "params": _pack(self.params),
            "mark": encode_array(self.mark),
            "pages": [
                {
                    "margins": p.margins.as_dict() if p.margins else None,
                    "crop_dims": list(p.crop_dims) if p.crop_dims else None,
                    "classes": [str(c) for c in p.classes],
                    "blocks": [{"index": b.index, "class": str(b.cls), "alpha": b.alpha,
                                "payload": _pack(b.payload)} for b in p.blocks],
                }
                for p in self.pages
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "SideInfo":
        if d.get("schema") != SCHEMA:
            raise SideInfoMismatch(f"unsupported side-information schema {d.get('schema')!r}")
        g = d["gamma"]
        pages = []
        for p in d["pages"]:
            blocks = [BlockSide(index=int(b["index"]), cls=BlockClass(b["class"]),
                                alpha=float(b["alpha"]), payload=_unpack(b["payload"]))
                      for b in p["blocks"]]
            pages.append(PageSide(
                margins=Margins(**p["margins"]) if p["margins"] else None,
                crop_dims=tuple(p["crop_dims"]) if p["crop_dims"] else None,
                classes=[BlockClass(c) for c in p["classes"]],
                blocks=blocks,
            ))
        return cls(
            algo=AlgoId.parse(d["algo"]),
            canonical=tuple(d["canonical"]),
            block_side=int(d["block_side"]),
            policy=AlphaPolicy.from_dict(d["policy"]),
            thresholds=EnergyThresholds(*g, pt_coverage=d.get("pt_coverage", 0.02)),
            eps=float(d["eps"]),
            mark=decode_array(d["mark"]),
            params=_unpack(d.get("params", {})),
            pages=pages,
        )

    @classmethod
    def from_json(cls, text: str) -> "SideInfo":
        try:
            return cls.from_dict(json.loads(text))
        except (KeyError, TypeError, ValueError) as exc:
            raise SideInfoMismatch(f"malformed side information: {exc}") from exc

    @classmethod
    def load(cls, path) -> "SideInfo":
        return cls.from_json(Path(path).read_text())
