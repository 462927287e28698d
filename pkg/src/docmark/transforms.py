"""Numerical kernels: orthonormal 2-D DCT, multi-level 2-D DWT, SVD, subband weights.

All arithmetic is float64; nothing here quantizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dctn, idctn

from docmark.errors import ConvergenceFailure, NonDyadicDims, NonPositiveWeight

ORIENTATIONS = ("LL", "LH", "HL", "HH")

_S2 = 1.0 / np.sqrt(2.0)
# orthonormal low-pass analysis filters; high-pass follows by alternating flip
WAVELETS = {
    "haar": np.array([_S2, _S2]),
    "db2": np.array([1 + np.sqrt(3), 3 + np.sqrt(3), 3 - np.sqrt(3), 1 - np.sqrt(3)])
    / (4 * np.sqrt(2)),
}


def dct2(tile) -> np.ndarray:
    return dctn(np.asarray(tile, dtype=np.float64), norm="ortho")


def idct2(coeffs) -> np.ndarray:
    return idctn(np.asarray(coeffs, dtype=np.float64), norm="ortho")


@dataclass
class Subbands:
    """Multi-level decomposition.

    ``details[k]`` holds the ``(LH, HL, HH)`` tiles of level ``k + 1`` (level 1
    is the finest); ``ll`` is the approximation at the deepest level.
    """

    ll: np.ndarray
    details: list = field(default_factory=list)
    wavelet: str = "haar"

    @property
    def levels(self) -> int:
        return len(self.details)

    def band(self, level: int, orientation: str) -> np.ndarray:
        if orientation == "LL":
            if level != self.levels:
                raise ValueError("LL is only kept at the deepest level")
            return self.ll
        return self.details[level - 1][ORIENTATIONS.index(orientation) - 1]

    def set_band(self, level: int, orientation: str, value: np.ndarray) -> None:
        if orientation == "LL":
            if level != self.levels:
                raise ValueError("LL is only kept at the deepest level")
            self.ll = value
            return
        lh, hl, hh = self.details[level - 1]
        trio = [lh, hl, hh]
        trio[ORIENTATIONS.index(orientation) - 1] = value
        self.details[level - 1] = tuple(trio)

    def deepest(self) -> dict:
        """Orientation -> tile at the deepest level."""
        return {o: self.band(self.levels, o) for o in ORIENTATIONS}

    def copy(self) -> "Subbands":
        return Subbands(self.ll.copy(), [tuple(t.copy() for t in d) for d in self.details],
                        self.wavelet)


def _filters(wavelet: str):
    try:
        h = WAVELETS[wavelet]
    except KeyError:
        raise ValueError(f"unknown wavelet {wavelet!r}; choose from {sorted(WAVELETS)}") from None
    g = h[::-1] * np.array([(-1) ** k for k in range(len(h))])
    return h, g


def _analyze(x: np.ndarray, axis: int, h: np.ndarray, g: np.ndarray):
    n = x.shape[axis]
    base = 2 * np.arange(n // 2)
    lo = np.zeros_like(np.take(x, base, axis=axis))
    hi = np.zeros_like(lo)
    for k in range(len(h)):
        xs = np.take(x, (base + k) % n, axis=axis)
        lo += h[k] * xs
        hi += g[k] * xs
    return lo, hi


def _synthesize(lo: np.ndarray, hi: np.ndarray, axis: int, h: np.ndarray, g: np.ndarray):
    half = lo.shape[axis]
    n = 2 * half
    shape = list(lo.shape)
    shape[axis] = n
    out = np.zeros(shape)
    base = 2 * np.arange(half)
    out_view = np.moveaxis(out, axis, 0)
    lo_v = np.moveaxis(lo, axis, 0)
    hi_v = np.moveaxis(hi, axis, 0)
    for k in range(len(h)):
        out_view[(base + k) % n] += h[k] * lo_v + g[k] * hi_v
    return out


def _dwt_level(x, h, g):
    lo, hi = _analyze(x, 0, h, g)      # along rows (vertical)
    ll, lh = _analyze(lo, 1, h, g)     # along columns
    hl, hh = _analyze(hi, 1, h, g)
    return ll, (lh, hl, hh)


def _idwt_level(ll, det, h, g):
    lh, hl, hh = det
    lo = _synthesize(ll, lh, 1, h, g)
    hi = _synthesize(hl, hh, 1, h, g)
    return _synthesize(lo, hi, 0, h, g)


def dwt2(tile, levels: int = 3, wavelet: str = "haar") -> Subbands:
    """Periodic-extension orthonormal 2-D DWT to ``levels`` levels."""
    x = np.asarray(tile, dtype=np.float64)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    step = 2 ** levels
    if x.ndim != 2 or x.shape[0] % step or x.shape[1] % step:
        raise NonDyadicDims(f"tile {x.shape} is not divisible by 2**{levels}")
    h, g = _filters(wavelet)
    details = []
    for _ in range(levels):
        x, det = _dwt_level(x, h, g)
        details.append(det)
    return Subbands(ll=x, details=details, wavelet=wavelet)


def idwt2(bands: Subbands) -> np.ndarray:
    h, g = _filters(bands.wavelet)
    x = bands.ll
    for det in reversed(bands.details):
        x = _idwt_level(x, det, h, g)
    return x


@dataclass
class SvdTriple:
    U: np.ndarray
    S: np.ndarray
    Vt: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return self.Vt.T

    def compose(self, s: np.ndarray | None = None) -> np.ndarray:
        s = self.S if s is None else s
        return (self.U * s) @ self.Vt


def svd(matrix) -> SvdTriple:
    """Thin SVD with non-increasing singular values (LAPACK divide and conquer)."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or min(a.shape) < 1:
        raise ValueError("svd needs a non-empty 2-D matrix")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SvdTriple(u, s, vt)


def singular_values(matrix) -> np.ndarray:
    """Singular values via the same LAPACK path as :func:`svd`.

    The values-only driver differs from the full one in the last few ulps;
    extraction compares against values from :func:`svd`, so an unmodified
    block must give exactly zero difference.
    """
    return svd(matrix).S


WeightTable = dict  # {(level, orientation): weight}


def weight_factors(levels: int, table: WeightTable | None = None) -> WeightTable:
    """Per-subband embedding weights; uniform 1.0 unless a table is supplied."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if table is None:
        out = {(lv, o): 1.0 for lv in range(1, levels + 1) for o in ORIENTATIONS[1:]}
        out[(levels, "LL")] = 1.0
        return out
    for key, w in table.items():
        if not w > 0:
            raise NonPositiveWeight(f"weight for {key} must be positive, got {w}")
    return dict(table)


def zigzag_order(h: int, w: int | None = None) -> np.ndarray:
    """Flat indices of an ``h x w`` array in JPEG zig-zag scan order."""
    w = h if w is None else w
    key = []
    for r in range(h):
        for c in range(w):
            d = r + c
            key.append((d, r if d % 2 else -r, r * w + c))
    key.sort()
    return np.array([k[2] for k in key], dtype=np.int64)
