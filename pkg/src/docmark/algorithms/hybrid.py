"""Algo4 (DWT-SVD) and Algo5 (DWT-DCT-SVD).

Both take a one-level DWT of the 128x128 block and of the 32x32 mark, then
shift the top 16 singular values of each 64x64 cover subband by ``alpha``
times the singular values of the matching 16x16 mark subband.

Algo5 also moves each cover subband into the DCT domain before the SVD.
An orthonormal DCT is an orthogonal change of basis on rows and columns and
leaves singular values untouched, so on its own it would make Algo5 a copy
of Algo4. With ``layout="zigzag"`` (the default) the DCT coefficients are
rearranged along the zig-zag scan into a row-major matrix first, which puts
the low-frequency energy into the leading rows and gives the SVD a genuinely
different matrix to work on. ``layout="grid"`` keeps the plain 2-D layout.
"""

from __future__ import annotations

import numpy as np

from docmark.algorithms.base import check_block, mark_array, require, requantize
from docmark.errors import PayloadMismatch
from docmark.transforms import (ORIENTATIONS, Subbands, dct2, dwt2, idct2, idwt2,
                                singular_values, svd, zigzag_order)

BLOCK_SIDE = 128
MARK_SIDE = 32
DEFAULT_AMPLITUDE = 32.0
LAYOUTS = ("grid", "zigzag")


def _forward(tile: np.ndarray, use_dct: bool, layout: str) -> np.ndarray:
    if not use_dct:
        return tile
    d = dct2(tile)
    if layout == "zigzag":
        return d.ravel()[zigzag_order(*d.shape)].reshape(d.shape)
    return d


def _inverse(tile: np.ndarray, use_dct: bool, layout: str) -> np.ndarray:
    if not use_dct:
        return tile
    if layout == "zigzag":
        flat = np.empty(tile.size)
        flat[zigzag_order(*tile.shape)] = tile.ravel()
        tile = flat.reshape(tile.shape)
    return idct2(tile)


def forward_chain(block, use_dct: bool = True, layout: str = "zigzag") -> dict:
    """Orientation -> transformed 64x64 subband (what the SVD sees)."""
    bands = dwt2(np.asarray(block, dtype=np.float64), 1, "haar").deepest()
    return {o: _forward(bands[o], use_dct, layout) for o in ORIENTATIONS}


def inverse_chain(parts: dict, use_dct: bool = True, layout: str = "zigzag") -> np.ndarray:
    t = {o: _inverse(parts[o], use_dct, layout) for o in ORIENTATIONS}
    return idwt2(Subbands(ll=t["LL"], details=[(t["LH"], t["HL"], t["HH"])], wavelet="haar"))


def _embed(block, mark, alpha, amplitude, use_dct, layout, name):
    if layout not in LAYOUTS:
        raise ValueError(f"layout must be one of {LAYOUTS}")
    c = check_block(block, BLOCK_SIDE)
    w = mark_array(mark, MARK_SIDE) * amplitude
    wbands = dwt2(w, 1, "haar").deepest()
    parts = forward_chain(c, use_dct, layout)
    payload = {"algo": name, "amplitude": amplitude, "layout": layout}
    marked = {}
    for o in ORIENTATIONS:
        wc = svd(wbands[o])
        cc = svd(parts[o])
        k = wc.S.size
        s_new = cc.S.copy()
        s_new[:k] += alpha * wc.S
        marked[o] = cc.compose(s_new)
        payload[f"S_c_{o}"] = cc.S[:k].copy()
        payload[f"U_w_{o}"] = wc.U
        payload[f"V_w_{o}"] = wc.V
    if alpha == 0:
        return c.astype(np.uint8), payload
    return requantize(inverse_chain(marked, use_dct, layout)), payload


def _extract(suspect, payload, alpha, use_dct, name):
    keys = [f"{p}_{o}" for o in ORIENTATIONS for p in ("S_c", "U_w", "V_w")]
    require(payload, keys + ["amplitude"], name)
    s = np.asarray(suspect, dtype=np.float64)
    if s.shape != (BLOCK_SIDE, BLOCK_SIDE):
        raise PayloadMismatch(f"suspect block {s.shape} is not {BLOCK_SIDE}x{BLOCK_SIDE}")
    half = MARK_SIDE // 2
    if alpha == 0:
        return np.zeros((MARK_SIDE, MARK_SIDE))
    layout = payload.get("layout", "grid")
    parts = forward_chain(s, use_dct, layout)
    est = {}
    for o in ORIENTATIONS:
        s_c = np.asarray(payload[f"S_c_{o}"])
        u_w = np.ascontiguousarray(payload[f"U_w_{o}"], dtype=np.float64)
        v_w = np.ascontiguousarray(payload[f"V_w_{o}"], dtype=np.float64)
        if u_w.shape != (half, s_c.size) or v_w.shape != (half, s_c.size):
            raise PayloadMismatch(f"{o}: mark singular vectors do not match S_c")
        s_a = singular_values(parts[o])[:s_c.size]
        s_w = (s_a - s_c) / (alpha * payload["amplitude"])
        est[o] = (u_w * s_w) @ v_w.T
    return idwt2(Subbands(ll=est["LL"], details=[(est["LH"], est["HL"], est["HH"])],
                          wavelet="haar"))


def embed_dwt_svd(block, mark, alpha: float, *, amplitude: float = DEFAULT_AMPLITUDE):
    return _embed(block, mark, alpha, amplitude, False, "grid", "algo4")


def extract_dwt_svd(suspect, payload: dict, alpha: float) -> np.ndarray:
    return _extract(suspect, payload, alpha, False, "algo4")


def embed_dwt_dct_svd(block, mark, alpha: float, *, amplitude: float = DEFAULT_AMPLITUDE,
                      layout: str = "zigzag"):
    return _embed(block, mark, alpha, amplitude, True, layout, "algo5")


def extract_dwt_dct_svd(suspect, payload: dict, alpha: float) -> np.ndarray:
    return _extract(suspect, payload, alpha, True, "algo5")
