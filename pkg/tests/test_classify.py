import math

import numpy as np
import pytest

from docmark.classify import (BlockClass, EnergyThresholds, HistClass, HistThresholds,
                              block_energy, block_stats, classify_energy, classify_histogram,
                              histogram_score)
from docmark.corpus import TILE_CLASSES, gen_page, labeled_tile
from docmark.page_prep import ROBUST_EPS, crop, normalize_size, page_margins, segment


def test_energy_extremes():
    assert block_energy(np.full((16, 16), 255)) == pytest.approx(255.0)
    assert block_energy(np.zeros((16, 16))) == 0.0
    half = np.zeros((16, 16))
    half[:8] = 255
    assert block_energy(half) == pytest.approx(half.mean()) == pytest.approx(127.5)


@pytest.mark.parametrize("side", [4, 128, 256])
@pytest.mark.parametrize("v", [0, 17, 200, 255])
def test_energy_of_constant_is_value(side, v):
    assert block_energy(np.full((side, side), float(v))) == pytest.approx(v)


def test_energy_bands():
    t = EnergyThresholds()
    assert t.levels == pytest.approx((229.5, 178.5, 102.0, 25.5))
    assert classify_energy(np.full((8, 8), 255)) is BlockClass.CW
    assert classify_energy(np.zeros((8, 8))) is BlockClass.CB
    # constant 200 is inside the CT band; with no ink it is sparse text
    assert classify_energy(np.full((8, 8), 200), EnergyThresholds(pt_coverage=0)) is BlockClass.CT
    assert classify_energy(np.full((8, 8), 150)) is BlockClass.PTPG
    assert classify_energy(np.full((8, 8), 60)) is BlockClass.CG


def test_threshold_validation():
    with pytest.raises(ValueError):
        EnergyThresholds(0.5, 0.7, 0.4, 0.1)
    with pytest.raises(ValueError):
        HistThresholds(1.0, 3.0, 0.5)


def test_texture_flag():
    assert {c for c in BlockClass if c.texture} == {BlockClass.CT, BlockClass.PTPG, BlockClass.CG}


def test_rendered_tiles():
    assert classify_energy(labeled_tile("CT", 1)) is BlockClass.CT
    assert classify_energy(labeled_tile("PT", 1)) is BlockClass.PT


def test_histogram_scores():
    assert histogram_score(np.full((16, 16), 90)) == pytest.approx(1.0)
    assert classify_histogram(np.full((16, 16), 90)) is HistClass.TEXT
    two = np.full((16, 16), 240)
    two[:4] = 20
    a, b = 64, 192
    assert histogram_score(two) == pytest.approx((a + b) / math.hypot(a, b))
    assert classify_histogram(two) is HistClass.TEXT
    flat = np.arange(256).reshape(16, 16)
    assert histogram_score(flat) == pytest.approx(16.0)
    assert classify_histogram(flat) is HistClass.NON_TEXTURE


def test_block_stats():
    assert block_stats(np.full((4, 4), 7)) == {"mean": 7.0, "variance": 0.0}
    half = np.zeros((4, 4))
    half[:2] = 255
    st = block_stats(half)
    assert st["mean"] == 127.5 and st["variance"] == pytest.approx(127.5 ** 2) == 16256.25


def test_ct_tiles_of_a_corpus_page_are_bright():
    p = gen_page("text", "latin", 0)
    canon = normalize_size(crop(p, page_margins(p, ROBUST_EPS)))
    ct = [b for b in segment(canon, 128).blocks if classify_energy(b) is BlockClass.CT]
    assert ct
    means = [block_stats(b)["mean"] for b in ct]
    assert 200 <= float(np.mean(means)) <= 245


@pytest.mark.parametrize("label", TILE_CLASSES)
def test_labeled_tiles_mostly_agree(label):
    hits = sum(str(classify_energy(labeled_tile(label, s))) == label for s in range(40))
    assert hits >= 38
