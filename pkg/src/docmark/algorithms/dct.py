"""Algo3: multiplicative embedding into the largest AC coefficients of the block DCT."""

from __future__ import annotations

import numpy as np

from docmark.algorithms.base import check_block, mark_array, require, requantize
from docmark.errors import InsufficientAC, PayloadMismatch
from docmark.transforms import dct2, idct2, zigzag_order

BLOCK_SIDE = 128
MARK_SIDE = 32
DEFAULT_TOLERANCE = 0.5
NAME = "algo3"


def select_ac(coeffs: np.ndarray, count: int) -> np.ndarray:
    """Zig-zag positions of the ``count`` largest-magnitude AC coefficients.

    Ties keep zig-zag order, so the selection is deterministic.
    """
    zz = zigzag_order(*coeffs.shape)[1:]  # drop DC
    mag = np.abs(coeffs.ravel()[zz])
    nonzero = int(np.count_nonzero(mag))
    if nonzero < count:
        raise InsufficientAC(f"only {nonzero} nonzero AC coefficients, need {count}")
    pick = np.argsort(-mag, kind="stable")[:count]
    return np.sort(pick) + 1  # positions along the zig-zag scan, DC = 0


def embed_dct(block, mark, alpha: float, tolerance: float = DEFAULT_TOLERANCE, *,
              gain: float = 1.0):
    """Return ``(watermarked uint8 block, payload)``.

    Selected coefficients become ``v * (1 + alpha * gain * w)``; ``gain`` is 1
    for the textbook rule.
    """
    c = check_block(block, BLOCK_SIDE)
    w = mark_array(mark, MARK_SIDE).ravel()
    coeffs = dct2(c)
    pos = select_ac(coeffs, w.size)
    flat_idx = zigzag_order(*coeffs.shape)[pos]
    v = coeffs.ravel()[flat_idx].copy()
    if alpha == 0:
        out = c.astype(np.uint8)
    else:
        marked = coeffs.ravel().copy()
        marked[flat_idx] = v * (1.0 + alpha * gain * w)
        out = requantize(idct2(marked.reshape(coeffs.shape)))
    payload = {
        "algo": NAME,
        "positions": pos,
        "coeffs": v,
        "gain": gain,
        "tolerance": tolerance,
    }
    return out, payload


def extract_dct(suspect, payload: dict, alpha: float, tolerance: float | None = None) -> np.ndarray:
    """Binary 32x32 mark (0/255) from coefficient changes relative to the original."""
    require(payload, ("positions", "coeffs"), NAME)
    s = np.asarray(suspect, dtype=np.float64)
    if s.shape != (BLOCK_SIDE, BLOCK_SIDE):
        raise PayloadMismatch(f"suspect block {s.shape} is not {BLOCK_SIDE}x{BLOCK_SIDE}")
    pos = np.asarray(payload["positions"], dtype=np.int64)
    v = np.asarray(payload["coeffs"], dtype=np.float64)
    if pos.size != MARK_SIDE * MARK_SIDE or v.shape != pos.shape:
        raise PayloadMismatch("payload must hold 1024 positions and coefficients")
    tol = payload.get("tolerance", DEFAULT_TOLERANCE) if tolerance is None else tolerance
    if alpha == 0:
        return np.zeros((MARK_SIDE, MARK_SIDE))
    flat_idx = zigzag_order(BLOCK_SIDE, BLOCK_SIDE)[pos]
    v2 = dct2(s).ravel()[flat_idx]
    w2 = np.abs(v2 - v) / (alpha * payload.get("gain", 1.0))
    bits = (w2 > tol * np.abs(v)).astype(np.float64) * 255.0
    return bits.reshape(MARK_SIDE, MARK_SIDE)
