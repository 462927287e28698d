"""Per-user fingerprints, average collusion, and colluder detection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from docmark.errors import BoundUnsatisfiable, DimensionMismatch, SideInfoMismatch
from docmark.raster_io import PageImage, WatermarkBits, quantize

DEFAULT_BOUND = 0.15
DEFAULT_THRESHOLD = 0.25
MAX_TRIES = 2000


@dataclass
class FingerprintSet:
    marks: list
    seed: int
    bound: float = DEFAULT_BOUND

    def __len__(self):
        return len(self.marks)

    def max_correlation(self) -> float:
        if len(self.marks) < 2:
            return 0.0
        r = np.corrcoef(np.stack([m.as_float().ravel() for m in self.marks]))
        np.fill_diagonal(r, 0.0)
        return float(np.abs(r).max())


def _balanced(rng, side: int) -> np.ndarray:
    n = side * side
    bits = np.zeros(n, dtype=np.uint8)
    bits[rng.permutation(n)[:n // 2]] = 1
    return bits


def generate_fingerprints(k: int, side: int = 32, seed: int = 0,
                          bound: float = DEFAULT_BOUND) -> FingerprintSet:
    """``k`` balanced random marks with pairwise |Pearson r| <= ``bound``."""
    if k < 1:
        raise ValueError("need at least one fingerprint")
    if k > side * side // 8:
        raise BoundUnsatisfiable(f"k={k} exceeds side^2/8 = {side * side // 8}")
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    centred: list[np.ndarray] = []
    while len(accepted) < k:
        for _ in range(MAX_TRIES):
            cand = _balanced(rng, side)
            c = cand - cand.mean()
            c = c / np.linalg.norm(c)
            if all(abs(float(c @ o)) <= bound for o in centred):
                accepted.append(cand)
                centred.append(c)
                break
        else:
            raise BoundUnsatisfiable(f"no mark within |r| <= {bound} after {MAX_TRIES} draws")
    marks = [WatermarkBits(a.reshape(side, side)) for a in accepted]
    return FingerprintSet(marks=marks, seed=seed, bound=bound)


def collude_average(docs) -> list:
    """Pixel-wise mean of several copies of the same document (lists of pages)."""
    docs = [list(d) for d in docs]
    if not docs:
        raise ValueError("need at least one document")
    n = len(docs[0])
    if any(len(d) != n for d in docs):
        raise DimensionMismatch("documents have different page counts")
    out = []
    for i in range(n):
        shapes = {d[i].pixels.shape for d in docs}
        if len(shapes) != 1:
            raise DimensionMismatch(f"page {i} differs in size between copies: {sorted(shapes)}")
        acc = np.zeros(docs[0][i].pixels.shape)
        for d in docs:
            acc += d[i].pixels
        out.append(PageImage(quantize(acc / len(docs))))
    return out


@dataclass
class Detection:
    flagged: list = field(default_factory=list)
    per_user_nc: list = field(default_factory=list)
    threshold: float = DEFAULT_THRESHOLD


def detect_colluders(pages, infos, fingerprints: FingerprintSet,
                     threshold: float = DEFAULT_THRESHOLD) -> Detection:
    """Score every user's own side information and fingerprint against ``pages``."""
    from docmark.pipeline import extract_pages

    if len(infos) != len(fingerprints):
        raise SideInfoMismatch(f"{len(infos)} side-information records for {len(fingerprints)} users")
    pages = list(pages)
    ncs = []
    for info, mark in zip(infos, fingerprints.marks):
        if not np.array_equal(np.asarray(info.mark), mark.bits):
            raise SideInfoMismatch("side information does not belong to the matching fingerprint")
        ncs.append(extract_pages(pages, info, reference=mark).nc_overall)
    flagged = [u for u, v in enumerate(ncs) if v > threshold]
    return Detection(flagged=flagged, per_user_nc=ncs, threshold=threshold)
