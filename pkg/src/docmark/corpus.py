"""Deterministic synthetic document pages.

Pages carry procedurally drawn glyph lines in several script styles, charts,
smooth photo-like images and ruled tables on an off-white or tinted paper
tone. Each page has a header and footer rule so that the gradient bounding
box of the content is exactly the canonical cropped size; the margins around
it are drawn per page from [40, 80] px.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from docmark.page_prep import DEFAULT_CANONICAL
from docmark.raster_io import DocumentManifest, PageImage, quantize, save_page

LAYOUTS = ("text", "figure", "table", "color", "mixed")
LANGUAGES = ("latin", "cjk", "devanagari", "arabic")
SS = 3          # supersampling factor for anti-aliased glyphs
PAD = 16        # inner padding between the rules' box and content
MARGIN_RANGE = (40, 80)


@dataclass(frozen=True)
class Script:
    adv: tuple[int, int]       # glyph advance range, px
    xh: float                  # x-height as a fraction of line height
    word: tuple[int, int]      # glyphs per word
    headline: bool = False     # continuous bar across each word
    baseline: bool = False     # connected baseline stroke
    square: bool = False       # fixed-width boxed glyphs


SCRIPTS = {
    "latin": Script(adv=(5, 10), xh=0.55, word=(2, 9)),
    "cjk": Script(adv=(13, 15), xh=0.8, word=(3, 12), square=True),
    "devanagari": Script(adv=(7, 11), xh=0.55, word=(2, 6), headline=True),
    "arabic": Script(adv=(5, 11), xh=0.45, word=(2, 7), baseline=True),
}


def _rect(canvas, r0, r1, c0, c1):
    canvas[max(r0, 0):max(r1, 0), max(c0, 0):max(c1, 0)] = 1.0


def _glyph(canvas, rng, script: Script, x, base, xh, adv, st):
    """Draw one glyph whose baseline is row ``base`` (supersampled coords)."""
    top = base - xh
    if script.square:
        inner = adv - 2 * SS
        _rect(canvas, top, top + st, x, x + inner)
        _rect(canvas, top, base, x, x + st)
        for _ in range(rng.integers(1, 4)):
            if rng.random() < 0.5:
                r = int(rng.integers(top, base - st))
                _rect(canvas, r, r + st, x, x + inner)
            else:
                c = int(rng.integers(x, x + inner - st))
                _rect(canvas, top, base, c, c + st)
        if rng.random() < 0.5:
            _rect(canvas, base - st, base, x, x + inner)
        return
    w = adv - 2 * SS
    asc = rng.random() < 0.3
    desc = rng.random() < 0.15
    t0 = top - (xh // 2 if asc else 0)
    b0 = base + (xh // 3 if desc else 0)
    _rect(canvas, t0, b0, x, x + st)
    if rng.random() < 0.6:
        _rect(canvas, top, base, x + w - st, x + w)
    if rng.random() < 0.5:
        _rect(canvas, top, top + st, x, x + w)
    if rng.random() < 0.5:
        _rect(canvas, base - st, base, x, x + w)
    if rng.random() < 0.35:
        m = top + xh // 2
        _rect(canvas, m, m + st, x, x + w)
    if script.baseline and rng.random() < 0.3:
        d = int(rng.integers(x, x + max(w - st, 1)))
        _rect(canvas, t0 - 2 * st, t0 - st, d, d + st)


def text_coverage(h: int, w: int, rng, script: Script, line_h: int, bold: bool = False,
                  ragged: float = 0.15) -> np.ndarray:
    """Ink coverage in [0, 1] of an ``h x w`` paragraph area."""
    sh, sw = h * SS, w * SS
    canvas = np.zeros((sh, sw), dtype=np.float32)
    lh = line_h * SS
    xh = int(lh * script.xh)
    st = SS * (2 if bold else 1)
    base = int(lh * 0.8)
    while base + lh // 4 < sh:
        end = sw if rng.random() > ragged else int(sw * rng.uniform(0.3, 0.9))
        x = 0
        while x < end - 12 * SS:
            n = int(rng.integers(*script.word))
            x0 = x
            for _ in range(n):
                adv = int(rng.integers(*script.adv)) * SS
                if x + adv > end:
                    break
                _glyph(canvas, rng, script, x, base, xh, adv, st)
                x += adv
            if script.headline and x > x0:
                _rect(canvas, base - xh - st, base - xh, x0, x - SS)
            if script.baseline and x > x0:
                _rect(canvas, base - st, base, x0, x - SS)
            x += int(rng.integers(3, 7)) * SS
        base += lh
    return canvas.reshape(h, SS, w, SS).mean(axis=(1, 3))


def _paint(img, cov, tone):
    """Composite ink of colour ``tone`` over ``img`` with the given coverage."""
    tone = np.asarray(tone, dtype=np.float64)
    if img.ndim == 3:
        cov = cov[..., None]
    img[...] = img * (1.0 - cov) + tone * cov


def _photo(h, w, rng) -> np.ndarray:
    """Smooth photo-like luminance field with mean in the graphics band."""
    field = gaussian_filter(rng.normal(size=(h, w)), sigma=rng.uniform(10, 25))
    field /= field.std() + 1e-12
    yy, xx = np.mgrid[0:h, 0:w]
    ramp = np.cos(xx / w * rng.uniform(1, 4) + rng.uniform(0, 6)) * np.sin(yy / h * rng.uniform(1, 3))
    return np.clip(rng.uniform(95, 150) + 35 * field + 25 * ramp, 10, 240)


def _chart(h, w, rng, bg) -> np.ndarray:
    c = np.full((h, w), float(bg))
    cov = np.zeros((h, w))
    cov[8:h - 20, 30:32] = 1
    cov[h - 22:h - 20, 30:w - 8] = 1
    for r in range(8, h - 22, max(24, h // 8)):
        cov[r, 33:w - 8] = np.maximum(cov[r, 33:w - 8], 0.35)
    if rng.random() < 0.5:
        nb = int(rng.integers(5, 12))
        bw = (w - 50) // nb
        for i in range(nb):
            top = int(rng.integers(20, h - 40))
            c[top:h - 22, 40 + i * bw:40 + i * bw + int(bw * 0.7)] = rng.uniform(40, 160)
    else:
        x = np.arange(34, w - 8)
        for k in range(int(rng.integers(1, 4))):
            y = (h / 2 + (h / 3) * np.sin(x / rng.uniform(20, 60) + rng.uniform(0, 6))
                 * np.exp(-x / w * rng.uniform(0, 1))).astype(int)
            y = np.clip(y, 10, h - 24)
            for t in range(2):
                cov[y + t, x] = 1
        fill = np.zeros((h, w), dtype=bool)
        fill[h // 3:h - 22, 34:w - 8] = True
        c[fill] = c[fill] * 0.6 + 40
    c = c * (1 - cov) + 30 * cov
    return gaussian_filter(c, 0.6)


def _table(h, w, rng, script, bg, ink) -> np.ndarray:
    cov = np.zeros((h, w))
    rows = int(rng.integers(6, 14))
    cols = int(rng.integers(3, 6))
    rh = h // rows
    cw = w // cols
    band = np.zeros((h, w), dtype=bool)
    for r in range(rows + 1):
        y = min(r * rh, h - 2)
        cov[y:y + 2, :] = 1
        if r < rows and r % 2 == 0:
            band[y + 2:y + rh, :] = True
    for c in range(cols + 1):
        x = min(c * cw, w - 2)
        cov[:rows * rh, x:x + 2] = 1
    for r in range(rows):
        for c in range(cols):
            ph = rh - 8
            pw = int(cw * rng.uniform(0.4, 0.9))
            if ph > 8 and pw > 20:
                t = text_coverage(ph, pw, rng, script, max(ph, 12), bold=(r == 0))
                y, x = r * rh + 4, c * cw + 6
                cov[y:y + ph, x:x + pw] = np.maximum(cov[y:y + ph, x:x + pw], t)
    img = np.full((h, w), float(bg))
    img[band] = bg - rng.uniform(15, 40)
    return img * (1 - cov) + ink * cov


def _regions(layout: str, h: int, w: int, rng):
    """Split the content area into (kind, r0, r1, c0, c1) regions."""
    gutter = 24
    col_w = (w - gutter) // 2
    out = []
    y = 40
    if layout == "text":
        while y < h - 60:
            hh = int(rng.integers(160, 420))
            hh = min(hh, h - 40 - y)
            if rng.random() < 0.3:
                out.append(("text", y, y + hh, 0, w))
            else:
                out.append(("text", y, y + hh, 0, col_w))
                out.append(("text", y, y + hh, col_w + gutter, w))
            y += hh + int(rng.integers(12, 40))
        return out
    kinds = {"figure": ["photo", "chart", "text", "photo", "chart"],
             "table": ["table", "text", "table"],
             "color": ["text", "photo", "text", "chart"],
             "mixed": ["text", "chart", "table", "photo", "text"]}[layout]
    while y < h - 80:
        kind = kinds[int(rng.integers(len(kinds)))]
        hh = min(int(rng.integers(200, 460)), h - 40 - y)
        if kind in ("photo", "chart") and rng.random() < 0.5:
            out.append((kind, y, y + hh, 0, col_w))
            out.append(("text", y, y + hh, col_w + gutter, w))
        elif kind == "text":
            out.append(("text", y, y + hh, 0, col_w))
            out.append(("text", y, y + hh, col_w + gutter, w))
        else:
            out.append((kind, y, y + hh, 0, w))
        y += hh + int(rng.integers(16, 40))
    return out


def gen_page(layout: str = "text", language: str = "latin", seed: int = 0,
             canonical: tuple[int, int] = DEFAULT_CANONICAL) -> PageImage:
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; choose from {LAYOUTS}")
    if language not in SCRIPTS:
        raise ValueError(f"unknown language {language!r}; choose from {sorted(SCRIPTS)}")
    rng = np.random.default_rng(seed)
    script = SCRIPTS[language]
    ch, cw = canonical
    color = layout == "color"
    paper = rng.uniform(236, 250)
    ink = rng.uniform(15, 45)
    if color:
        tint = np.array([rng.uniform(225, 248), rng.uniform(225, 248), rng.uniform(215, 245)])
    else:
        tint = np.array([paper])
    content = np.ones((ch, cw, tint.size)) * tint
    luma_bg = float(tint.mean())
    inner = content[PAD:ch - PAD, PAD:cw - PAD]
    ih, iw = inner.shape[:2]
    line_h = int(rng.integers(15, 22))
    for kind, r0, r1, c0, c1 in _regions(layout, ih, iw, rng):
        h, w = r1 - r0, c1 - c0
        if h < 24 or w < 60:
            continue
        if kind != "text" and h < 80:
            kind = "text"
        view = inner[r0:r1, c0:c1]
        if kind == "text":
            cov = text_coverage(h, w, rng, script, line_h)
            tone = ink if not color else np.array([ink, ink, ink + rng.uniform(0, 60)])
            _paint(view, cov, tone if color else [ink])
        else:
            if kind == "photo":
                g = _photo(h, w, rng)
            elif kind == "chart":
                g = _chart(h, w, rng, luma_bg)
            else:
                g = _table(h, w, rng, script, luma_bg, ink)
            if color:
                hue = rng.uniform(0.75, 1.15, size=3)
                view[...] = np.clip(g[..., None] * hue, 0, 255)
            else:
                view[..., 0] = g
    # header/footer: a short title line above the body and the page rules
    title = text_coverage(line_h + 4, int(iw * rng.uniform(0.3, 0.6)), rng, script, line_h + 4,
                          bold=True, ragged=0)
    _paint(inner[8:8 + title.shape[0], :title.shape[1]], title, [ink] * tint.size)
    rule = [ink] * tint.size
    content[1:3, 1:cw - 1] = rule
    content[ch - 3:ch - 1, 1:cw - 1] = rule
    # pad with paper-tone margins
    ml, mr, mt, mb = (int(v) for v in rng.integers(MARGIN_RANGE[0], MARGIN_RANGE[1] + 1, size=4))
    page = np.ones((ch + mt + mb, cw + ml + mr, tint.size)) * tint
    page[mt:mt + ch, ml:ml + cw] = content
    px = quantize(page)
    return PageImage(px[..., 0] if tint.size == 1 else px)


def _doc_seed(seed: int, li: int, yi: int, page: int) -> int:
    return int(np.random.SeedSequence([seed, li, yi, page]).generate_state(1)[0])


def gen_corpus(outdir, languages=("latin",), pages: int = 1, layouts=("text",),
               seed: int = 0) -> list[Path]:
    """Write one document per (language, layout) pair; returns manifest paths."""
    if not layouts:
        raise ValueError("at least one layout is required")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifests = []
    for li, lang in enumerate(languages):
        for yi, layout in enumerate(layouts):
            doc_id = f"{lang}-{layout}"
            names = []
            for p in range(pages):
                page = gen_page(layout, lang, _doc_seed(seed, li, yi, p))
                name = f"{doc_id}-p{p + 1:02d}.png"
                save_page(page, outdir / name)
                names.append(name)
            m = DocumentManifest(id=doc_id, pages=names, language=lang, base_dir=outdir)
            path = outdir / f"{doc_id}.json"
            m.save(path)
            manifests.append(path)
    return manifests


def corpus_pages(languages=("latin",), pages: int = 1, layouts=("text",), seed: int = 0):
    """In-memory variant of :func:`gen_corpus`: ``{doc_id: [PageImage, ...]}``."""
    docs = {}
    for li, lang in enumerate(languages):
        for yi, layout in enumerate(layouts):
            docs[f"{lang}-{layout}"] = [gen_page(layout, lang, _doc_seed(seed, li, yi, p))
                                       for p in range(pages)]
    return docs


TILE_CLASSES = ("CW", "CB", "PT", "CT", "PTPG", "CG")


def _field(h, w, rng, mean, spread=25.0) -> np.ndarray:
    f = gaussian_filter(rng.normal(size=(h, w)), sigma=rng.uniform(4, 12))
    f /= f.std() + 1e-12
    return np.clip(mean + spread * f, 0, 255)


def labeled_tile(label: str, seed: int = 0, side: int = 128, language: str = "latin") -> np.ndarray:
    """A gray ``side x side`` tile drawn to be an instance of block class ``label``.

    CW is blank paper, CB a solid dark fill, PT a single short word group on
    grey (recycled or scanned) paper, CT a dense paragraph, PTPG a paragraph sharing the tile with a
    mid-tone graphic and CG a dark graphic filling the tile.
    """
    if label not in TILE_CLASSES:
        raise ValueError(f"unknown class {label!r}; choose from {TILE_CLASSES}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, TILE_CLASSES.index(label)]))
    script = SCRIPTS[language]
    paper = rng.uniform(236, 250)
    ink = rng.uniform(15, 45)
    tile = np.full((side, side), paper)
    if label == "CW":
        tile += rng.normal(0, 1.0, size=tile.shape)
    elif label == "CB":
        tile = rng.uniform(2, 18) + rng.normal(0, 1.0, size=tile.shape)
    elif label == "PT":
        # on bright paper a few words never leave the CW band; sparse text
        # reaches the text energy band only on a darker paper tone
        tile[:] = rng.uniform(195, 225)
        line_h = int(rng.integers(15, 22))
        h, w = line_h * 4 // 3, int(rng.integers(40, 72))
        r0 = int(rng.integers(0, side - h))
        c0 = int(rng.integers(0, side - w))
        cov = text_coverage(h, w, rng, script, line_h, ragged=0)
        _paint(tile[r0:r0 + h, c0:c0 + w, None], cov, [ink])
    elif label == "CT":
        cov = text_coverage(side, side, rng, script, int(rng.integers(13, 20)), ragged=0)
        _paint(tile[..., None], cov, [ink])
    elif label == "PTPG":
        cut = int(side * rng.uniform(0.5, 0.7))
        cov = text_coverage(side, side - cut, rng, script, int(rng.integers(13, 20)), ragged=0)
        _paint(tile[:, cut:, None], cov, [ink])
        tile[:, :cut] = _field(side, cut, rng, rng.uniform(70, 130))
    else:
        tile = _field(side, side, rng, rng.uniform(40, 95))
    return quantize(tile)
