import json

import numpy as np
import pytest

from docmark.classify import BlockClass, classify_energy
from docmark.corpus import LAYOUTS, SCRIPTS, corpus_pages, gen_corpus, gen_page
from docmark.page_prep import DEFAULT_CANONICAL, ROBUST_EPS, crop, page_margins, segment
from docmark.raster_io import DocumentManifest


def classes(page):
    c = crop(page, page_margins(page, ROBUST_EPS))
    assert c.shape[:2] == DEFAULT_CANONICAL
    from docmark.raster_io import to_luma

    return [classify_energy(b) for b in segment(to_luma(c), 128).blocks]


@pytest.mark.parametrize("language", sorted(SCRIPTS))
def test_text_layout_is_mostly_text(language):
    cls = classes(gen_page("text", language, 1))
    assert sum(c in (BlockClass.CT, BlockClass.PT) for c in cls) >= 0.6 * len(cls)


@pytest.mark.parametrize("seed", range(3))
def test_figure_layout_has_graphics(seed):
    cls = classes(gen_page("figure", "latin", seed))
    assert sum(c in (BlockClass.CG, BlockClass.PTPG) for c in cls) >= 0.1 * len(cls)


@pytest.mark.parametrize("layout", LAYOUTS)
def test_content_box_is_canonical(layout):
    p = gen_page(layout, "cjk", 4)
    m = page_margins(p, ROBUST_EPS)
    assert all(40 <= v <= 80 for v in m.as_dict().values())
    assert (p.channels == 3) == (layout == "color")


def test_deterministic(tmp_path):
    a = gen_corpus(tmp_path / "a", ("latin", "arabic"), 2, ("text", "table"), seed=5)
    b = gen_corpus(tmp_path / "b", ("latin", "arabic"), 2, ("text", "table"), seed=5)
    assert [p.name for p in a] == [p.name for p in b]
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    m = DocumentManifest.load(a[0])
    assert len(m.load_pages()) == 2 and json.loads(a[0].read_text())["language"] == "latin"
    mem = corpus_pages(("latin", "arabic"), 2, ("text", "table"), seed=5)
    assert mem["latin-text"] == m.load_pages()


def test_seeds_differ():
    assert gen_page("text", "latin", 1) != gen_page("text", "latin", 2)
    with pytest.raises(ValueError):
        gen_page("poster")
    with pytest.raises(ValueError):
        gen_page("text", "klingon")
