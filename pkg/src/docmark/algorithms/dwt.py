"""Algo1: additive embedding of the mark's one-level subbands into deep DWT subbands.

The 32x32 mark is decomposed once (four 16x16 subbands); each one is added
to the top-left corner of the same-orientation subband of the 256x256 cover
block at every embedding level. Extraction fuses the per-level estimates with
the reciprocal-distortion weights ``(w * 2**l / sqrt(D))**2``, where ``D`` is
the local mean squared coefficient change over an ``nx x ny`` window.
With a single embedding level the fusion is the identity.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter

from docmark.algorithms.base import check_block, mark_array, require, requantize
from docmark.errors import DimensionMismatch, PayloadMismatch
from docmark.transforms import ORIENTATIONS, Subbands, dwt2, idwt2, weight_factors

BLOCK_SIDE = 256
MARK_SIDE = 32
DEFAULT_LEVELS = 3
DEFAULT_AMPLITUDE = 32.0
NAME = "algo1"


def _mark_bands(mark: np.ndarray, wavelet: str) -> dict:
    return dwt2(mark, 1, wavelet).deepest()


def _embed_targets(depth: int, embed_levels) -> list[tuple[int, str]]:
    targets = []
    for lv in embed_levels:
        if not 1 <= lv <= depth:
            raise ValueError(f"embedding level {lv} outside 1..{depth}")
        for o in ORIENTATIONS:
            if o == "LL" and lv != depth:
                continue
            targets.append((lv, o))
    return targets


def embed_dwt(block, mark, alpha: float, weights=None, *, levels: int = DEFAULT_LEVELS,
              embed_levels=None, amplitude: float = DEFAULT_AMPLITUDE,
              wavelet: str = "haar"):
    """Return ``(watermarked uint8 block, payload)``."""
    c = check_block(block, BLOCK_SIDE)
    w = mark_array(mark, MARK_SIDE) * amplitude
    embed_levels = tuple(embed_levels or (levels,))
    weights = weight_factors(levels, weights)
    bands = dwt2(c, levels, wavelet)
    half = MARK_SIDE // 2
    originals = {}
    marked = bands.copy()
    wb = _mark_bands(w, wavelet)
    for lv, o in _embed_targets(levels, embed_levels):
        sb = bands.band(lv, o)
        if sb.shape[0] < half or sb.shape[1] < half:
            raise DimensionMismatch(f"level-{lv} subband {sb.shape} cannot hold a {half}x{half} band")
        originals[f"{o}{lv}"] = sb.copy()
        new = sb.copy()
        new[:half, :half] += alpha * weights[(lv, o)] * wb[o]
        marked.set_band(lv, o, new)
    out = requantize(idwt2(marked)) if alpha != 0 else c.astype(np.uint8)
    payload = {
        "algo": NAME,
        "levels": levels,
        "embed_levels": list(embed_levels),
        "wavelet": wavelet,
        "amplitude": amplitude,
        "weights": {f"{o}{lv}": weights[(lv, o)] for lv, o in _embed_targets(levels, embed_levels)},
        **{f"C_{k}": v for k, v in originals.items()},
    }
    return out, payload


def extract_dwt(suspect, payload: dict, alpha: float, weights=None, *,
                neighborhood: tuple[int, int] = (3, 3)) -> np.ndarray:
    """Recover the (real-valued) 32x32 mark from a suspect 256x256 block."""
    require(payload, ("levels", "embed_levels", "wavelet", "amplitude"), NAME)
    s = np.asarray(suspect, dtype=np.float64)
    if s.shape != (BLOCK_SIDE, BLOCK_SIDE):
        raise PayloadMismatch(f"suspect block {s.shape} does not match payload {BLOCK_SIDE}x{BLOCK_SIDE}")
    levels = payload["levels"]
    wavelet = payload["wavelet"]
    bands: Subbands = dwt2(s, levels, wavelet)
    half = MARK_SIDE // 2
    stored_w = payload.get("weights", {})
    if alpha == 0:
        return np.zeros((MARK_SIDE, MARK_SIDE))
    fused = {}
    norm = {}
    for lv, o in _embed_targets(levels, payload["embed_levels"]):
        key = f"{o}{lv}"
        orig = np.asarray(payload.get(f"C_{key}"))
        cur = bands.band(lv, o)
        if orig.shape != cur.shape:
            raise PayloadMismatch(f"subband {key}: payload {orig.shape} vs suspect {cur.shape}")
        w_lt = float(weights[(lv, o)]) if weights else float(stored_w.get(key, 1.0))
        diff = (cur - orig)[:half, :half]
        est = diff / (alpha * w_lt * payload["amplitude"])
        dist = uniform_filter(diff * diff, size=neighborhood, mode="nearest")
        q = (w_lt * 2.0 ** lv) ** 2 / np.maximum(dist, 1e-12)
        fused[o] = fused.get(o, 0.0) + est * q
        norm[o] = norm.get(o, 0.0) + q
    zero = np.zeros((half, half))
    parts = {o: (fused[o] / norm[o] if o in fused else zero) for o in ORIENTATIONS}
    rec = Subbands(ll=parts["LL"], details=[(parts["LH"], parts["HL"], parts["HH"])],
                   wavelet=wavelet)
    return idwt2(rec)
