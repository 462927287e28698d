import numpy as np
import pytest

from docmark.corpus import corpus_pages, gen_page
from docmark.raster_io import WatermarkBits


@pytest.fixture(scope="session")
def mark():
    rng = np.random.default_rng(7)
    return WatermarkBits((rng.random((32, 32)) < 0.5).astype(np.uint8))


@pytest.fixture(scope="session")
def text_page():
    return gen_page("text", "latin", 3)


@pytest.fixture(scope="session")
def mixed_page():
    return gen_page("mixed", "latin", 5)


@pytest.fixture(scope="session")
def small_corpus():
    return corpus_pages(("latin",), 1, ("text", "figure"), seed=0)


def texture_tile(seed=0, side=128):
    """Dense text-like tile with plenty of AC energy (CT band)."""
    from docmark.corpus import labeled_tile

    return labeled_tile("CT", seed, side)


def graphic_tile(seed=0, side=128):
    from docmark.corpus import labeled_tile

    return labeled_tile("PTPG", seed, side)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
