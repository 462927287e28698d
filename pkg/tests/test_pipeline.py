import numpy as np
import pytest

from docmark.attacks import jpeg_compress
from docmark.classify import BlockClass
from docmark.errors import ConfigError, NoTextureBlocks, SideInfoMismatch
from docmark.metrics import psnr, ssim
from docmark.page_prep import bilinear_resize
from docmark.pipeline import PipelineConfig, embed_pages, extract_pages, texture_mask
from docmark.raster_io import PageImage


def test_text_document_quality(text_page, mark):
    pages, info = embed_pages([text_page], mark, "algo2")
    assert psnr(text_page, pages[0]) > 45
    assert ssim(text_page, pages[0]) > 0.99
    assert extract_pages(pages, info).nc_overall >= 0.95


def test_clean_original_scores_low(text_page, mixed_page, mark):
    for algo in ("algo1", "algo2", "algo3", "algo4", "algo5"):
        _, info = embed_pages([text_page, mixed_page], mark, algo)
        assert extract_pages([text_page, mixed_page], info).nc_overall < 0.3


def test_blank_document():
    blank = PageImage(np.full((1400, 1100), 250, np.uint8))
    with pytest.raises(NoTextureBlocks):
        embed_pages([blank], np.eye(32), "algo2")


def test_blank_page_in_document(mixed_page, mark):
    blank = PageImage(np.full((1400, 1100), 250, np.uint8))
    pages, info = embed_pages([blank, mixed_page], mark, "algo2")
    assert pages[0] is blank and info.pages[0].margins is None
    assert extract_pages(pages, info).nc_overall > 0.95


def test_wrong_algo_and_config(mixed_page, mark):
    pages, info = embed_pages([mixed_page], mark, "algo2")
    with pytest.raises(SideInfoMismatch):
        extract_pages(pages, info, algo="algo5")
    with pytest.raises(ConfigError):
        embed_pages([mixed_page], mark, "algo1", PipelineConfig(block_side=128))
    with pytest.raises(ConfigError):
        embed_pages([mixed_page], np.eye(16), "algo2")


def test_non_texture_regions_untouched(mixed_page, mark):
    pages, info = embed_pages([mixed_page], mark, "algo4")
    tex = texture_mask(info, 0, mixed_page.shape)
    assert tex.any() and not tex.all()
    changed = mixed_page.pixels != pages[0].pixels
    assert changed.any() and not changed[~tex].any()


def test_color_page_every_channel_gets_luma_delta(mark):
    from docmark.corpus import gen_page

    page = gen_page("color", "latin", 2)
    pages, info = embed_pages([page], mark, "algo2")
    d = pages[0].pixels.astype(int) - page.pixels.astype(int)
    interior = (d != 0).all(axis=2) & (page.pixels > 5).all(axis=2) & (page.pixels < 250).all(axis=2)
    assert interior.sum() > 1000
    assert (d[interior].max(axis=1) - d[interior].min(axis=1)).max() <= 1
    assert extract_pages(pages, info).nc_overall > 0.95


def test_non_canonical_crop_is_resized(mark):
    from docmark.corpus import gen_page

    page = gen_page("figure", "latin", 9)
    big = PageImage(np.round(bilinear_resize(page.pixels, (int(page.height * 1.1),
                                                          int(page.width * 1.1)))).astype(np.uint8))
    pages, info = embed_pages([big], mark, "algo2")
    assert info.pages[0].crop_dims != info.canonical
    assert extract_pages(pages, info).nc_overall > 0.9


def test_extraction_uses_suspect_classes(mixed_page, mark):
    pages, info = embed_pages([mixed_page], mark, "algo2")
    res = extract_pages([jpeg_compress(pages[0], 50)], info)
    classes = info.pages[0].classes
    assert all(BlockClass(classes[i]).texture for _, i in res.block_ids)
    assert len(res.marks) == res.report.count <= info.texture_blocks
