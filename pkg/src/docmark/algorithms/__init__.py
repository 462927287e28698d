"""Block-level embed/extract pairs behind a single dispatch table."""

from __future__ import annotations

from docmark.algorithms.base import AlgoId, AlphaPolicy, alpha_for
from docmark.algorithms.dct import embed_dct, extract_dct
from docmark.algorithms.dwt import embed_dwt, extract_dwt
from docmark.algorithms.hybrid import (embed_dwt_dct_svd, embed_dwt_svd, extract_dwt_dct_svd,
                                       extract_dwt_svd)
from docmark.algorithms.svd import embed_svd, extract_svd

# per-algorithm tuning knobs accepted through ``params``
EMBED_PARAMS = {
    AlgoId.ALGO1: ("amplitude", "levels", "embed_levels", "wavelet", "weights"),
    AlgoId.ALGO2: ("amplitude",),
    AlgoId.ALGO3: ("tolerance", "gain"),
    AlgoId.ALGO4: ("amplitude",),
    AlgoId.ALGO5: ("amplitude", "layout"),
}
EXTRACT_PARAMS = {
    AlgoId.ALGO1: ("weights", "neighborhood"),
    AlgoId.ALGO2: (),
    AlgoId.ALGO3: ("tolerance",),
    AlgoId.ALGO4: (),
    AlgoId.ALGO5: (),
}

_EMBED = {
    AlgoId.ALGO1: embed_dwt,
    AlgoId.ALGO2: embed_svd,
    AlgoId.ALGO3: embed_dct,
    AlgoId.ALGO4: embed_dwt_svd,
    AlgoId.ALGO5: embed_dwt_dct_svd,
}
_EXTRACT = {
    AlgoId.ALGO1: extract_dwt,
    AlgoId.ALGO2: extract_svd,
    AlgoId.ALGO3: extract_dct,
    AlgoId.ALGO4: extract_dwt_svd,
    AlgoId.ALGO5: extract_dwt_dct_svd,
}


def _pick(params, allowed):
    return {k: v for k, v in (params or {}).items() if k in allowed and v is not None}


def embed_block(algo, block, mark, alpha: float, params: dict | None = None):
    algo = AlgoId.parse(algo)
    return _EMBED[algo](block, mark, alpha, **_pick(params, EMBED_PARAMS[algo]))


def extract_block(algo, suspect, payload: dict, alpha: float, params: dict | None = None):
    algo = AlgoId.parse(algo)
    return _EXTRACT[algo](suspect, payload, alpha, **_pick(params, EXTRACT_PARAMS[algo]))


__all__ = [
    "AlgoId", "AlphaPolicy", "alpha_for", "embed_block", "extract_block",
    "embed_dwt", "extract_dwt", "embed_svd", "extract_svd", "embed_dct", "extract_dct",
    "embed_dwt_svd", "extract_dwt_svd", "embed_dwt_dct_svd", "extract_dwt_dct_svd",
]
