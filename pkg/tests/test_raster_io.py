import os

import numpy as np
import pytest
from PIL import Image

from docmark.errors import CorruptImage, ImageIOError, NotSquare, UnsupportedFormat
from docmark.raster_io import (DocumentManifest, PageImage, WatermarkBits, load_page,
                               load_watermark, quantize, save_page, save_watermark, to_luma)


def test_pgm_all_white(tmp_path):
    p = tmp_path / "w.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes([255] * 16))
    page = load_page(p)
    assert page.shape == (4, 4) and page.channels == 1
    assert (page.pixels == 255).all()


def test_rgb_png_channel_exact(tmp_path):
    table = np.array([[[10, 20, 30], [40, 50, 60]],
                      [[70, 80, 90], [200, 210, 220]]], dtype=np.uint8)
    p = tmp_path / "c.png"
    Image.fromarray(table, mode="RGB").save(p)
    page = load_page(p)
    assert page.channels == 3
    assert page.pixels.tobytes() == table.tobytes()


def test_sixteen_bit_png_shifted(tmp_path):
    a = np.array([[0, 256, 65535]], dtype=np.uint16)
    p = tmp_path / "d.png"
    Image.fromarray(a).save(p)
    assert load_page(p).pixels.tolist() == [[0, 1, 255]]


def test_truncated_png(tmp_path):
    p = tmp_path / "t.png"
    Image.fromarray(np.zeros((40, 40), dtype=np.uint8) + 90).save(p)
    p.write_bytes(p.read_bytes()[:60])
    with pytest.raises(CorruptImage):
        load_page(p)


def test_unsupported_and_missing(tmp_path):
    p = tmp_path / "x.gif"
    p.write_bytes(b"GIF89a" + bytes(20))
    with pytest.raises(UnsupportedFormat):
        load_page(p)
    with pytest.raises(FileNotFoundError):
        load_page(tmp_path / "nope.png")


def test_luma():
    gray = PageImage(np.full((3, 3), 77, dtype=np.uint8))
    assert to_luma(gray) is gray
    white = PageImage(np.full((2, 2, 3), 255, dtype=np.uint8))
    assert (to_luma(white).pixels == 255).all()
    red = np.zeros((1, 1, 3), dtype=np.uint8)
    red[..., 0] = 255
    assert to_luma(PageImage(red)).pixels[0, 0] == round(0.299 * 255) == 76


def test_quantize_half_away_from_zero():
    assert quantize(np.array([0.5, 1.5, 2.49, -0.5, 254.5, 300.0])).tolist() == \
        [1, 2, 2, 0, 255, 255]


def test_load_watermark(tmp_path):
    rng = np.random.default_rng(1)
    img = np.where(rng.random((32, 32)) < 0.5, 0, 255).astype(np.uint8)
    p = tmp_path / "m.png"
    Image.fromarray(img).save(p)
    wm = load_watermark(p)
    for r, c in [(0, 0), (5, 17), (31, 31), (20, 3)]:
        assert wm.bits[r, c] == (1 if img[r, c] == 255 else 0)
    Image.fromarray(np.full((32, 32), 255, dtype=np.uint8)).save(p)
    assert load_watermark(p).bits.all()
    Image.fromarray(np.zeros((31, 32), dtype=np.uint8)).save(p)
    with pytest.raises(NotSquare):
        load_watermark(p)


def test_watermark_round_trip(tmp_path):
    wm = WatermarkBits(np.eye(32, dtype=np.uint8))
    save_watermark(wm, tmp_path / "w.png")
    assert load_watermark(tmp_path / "w.png") == wm


@pytest.mark.parametrize("suffix,channels", [(".png", 1), (".png", 3), (".pgm", 1), (".ppm", 3)])
def test_save_load_round_trip(tmp_path, suffix, channels):
    rng = np.random.default_rng(2)
    shape = (17, 23) if channels == 1 else (17, 23, 3)
    page = PageImage(rng.integers(0, 256, size=shape, dtype=np.uint8))
    save_page(page, tmp_path / f"p{suffix}")
    assert load_page(tmp_path / f"p{suffix}") == page


def test_save_minimal_and_errors(tmp_path):
    one = PageImage(np.array([[9]], dtype=np.uint8))
    save_page(one, tmp_path / "one.png")
    assert load_page(tmp_path / "one.png") == one
    with pytest.raises(UnsupportedFormat):
        save_page(one, tmp_path / "one.jpg")


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_save_read_only(tmp_path):
    d = tmp_path / "ro"
    d.mkdir()
    d.chmod(0o500)
    with pytest.raises(ImageIOError):
        save_page(PageImage(np.zeros((2, 2), dtype=np.uint8)), d / "x.png")


def test_save_into_missing_directory(tmp_path):
    with pytest.raises(ImageIOError):
        save_page(PageImage(np.zeros((2, 2), dtype=np.uint8)), tmp_path / "no" / "x.png")


def test_page_validation():
    with pytest.raises(ValueError):
        PageImage(np.zeros((2, 2, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        PageImage(np.full((2, 2), 0.5))
    p = PageImage(np.zeros((2, 2), dtype=np.int64))
    assert p.pixels.dtype == np.uint8
    with pytest.raises(ValueError):
        p.pixels[0, 0] = 3


def test_manifest(tmp_path):
    page = PageImage(np.full((5, 5), 200, dtype=np.uint8))
    save_page(page, tmp_path / "a.png")
    DocumentManifest(id="doc", pages=["a.png"], language="latin").save(tmp_path / "doc.json")
    m = DocumentManifest.load(tmp_path / "doc.json")
    assert m.id == "doc" and m.language == "latin"
    assert m.load_pages() == [page]
    with pytest.raises(ValueError):
        DocumentManifest(id="d", pages=[])
    with pytest.raises(ValueError):
        DocumentManifest(id="d", pages=["a.png", "a.png"])
