"""Algo2: shift the leading singular values of the cover block by the mark's."""

from __future__ import annotations

import numpy as np

from docmark.algorithms.base import check_block, mark_array, require, requantize
from docmark.errors import PayloadMismatch
from docmark.transforms import singular_values, svd

BLOCK_SIDE = 128
MARK_SIDE = 32
DEFAULT_AMPLITUDE = 32.0
NAME = "algo2"


def embed_svd(block, mark, alpha: float, *, amplitude: float = DEFAULT_AMPLITUDE):
    """Return ``(watermarked uint8 block, payload)``.

    Only the top ``MARK_SIDE`` singular values of the block are shifted,
    by ``alpha`` times the singular values of the amplitude-scaled mark.
    """
    c = check_block(block, BLOCK_SIDE)
    w = mark_array(mark, MARK_SIDE) * amplitude
    wc = svd(w)
    cc = svd(c)
    k = wc.S.size
    s_new = cc.S.copy()
    s_new[:k] += alpha * wc.S
    out = requantize(cc.compose(s_new)) if alpha != 0 else c.astype(np.uint8)
    payload = {
        "algo": NAME,
        "amplitude": amplitude,
        "S_c": cc.S[:k].copy(),
        "U_w": wc.U,
        "V_w": wc.V,
    }
    return out, payload


def extract_svd(suspect, payload: dict, alpha: float) -> np.ndarray:
    require(payload, ("S_c", "U_w", "V_w", "amplitude"), NAME)
    s = np.asarray(suspect, dtype=np.float64)
    if s.shape != (BLOCK_SIDE, BLOCK_SIDE):
        raise PayloadMismatch(f"suspect block {s.shape} is not {BLOCK_SIDE}x{BLOCK_SIDE}")
    s_c = np.asarray(payload["S_c"])
    u_w = np.ascontiguousarray(payload["U_w"], dtype=np.float64)
    v_w = np.ascontiguousarray(payload["V_w"], dtype=np.float64)
    k = s_c.size
    if u_w.shape != (MARK_SIDE, k) or v_w.shape != (MARK_SIDE, k):
        raise PayloadMismatch("watermark singular vectors do not match S_c")
    if alpha == 0:
        return np.zeros((MARK_SIDE, MARK_SIDE))
    s_a = singular_values(s)[:k]
    s_w = (s_a - s_c) / (alpha * payload["amplitude"])
    return (u_w * s_w) @ v_w.T
