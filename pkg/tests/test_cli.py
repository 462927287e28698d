import csv
import json

import pytest

from docmark.cli import main


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    assert main(["gen-corpus", "--out", str(d), "--layouts", "text,mixed", "--seed", "1"]) == 0
    return d


def run(*argv):
    return main([str(a) for a in argv])


def test_embed_extract_evaluate(corpus_dir, tmp_path, capsys):
    m = corpus_dir / "latin-mixed.json"
    out = tmp_path / "wm"
    assert run("embed", "--manifest", m, "--algo", "algo4", "--out", out) == 0
    assert (out / "sideinfo.json").is_file() and (out / "latin-mixed-p01.png").is_file()
    rep = tmp_path / "r.json"
    assert run("extract", "--manifest", out / "latin-mixed.json", "--sideinfo",
               out / "sideinfo.json", "--report", rep) == 0
    assert json.loads(rep.read_text())["nc_overall"] >= 0.88
    assert run("evaluate", "--original", m, "--suspect", out / "latin-mixed.json",
               "--sideinfo", out / "sideinfo.json", "--report", rep) == 0
    ev = json.loads(rep.read_text())
    assert ev["psnr_db"] > 45 and ev["ssim"] > 0.99 and ev["nc_overall"] >= 0.88


def test_exit_codes(corpus_dir, tmp_path):
    m = corpus_dir / "latin-text.json"
    out = tmp_path / "wm"
    assert run("embed", "--manifest", m, "--algo", "algo1", "--block-side", 128, "--out", out) == 2
    assert run("embed", "--manifest", tmp_path / "missing.json", "--out", out) == 2
    assert run("embed", "--manifest", m, "--set", "colour=red", "--out", out) == 2
    assert run("embed", "--manifest", m, "--algo", "algo2", "--out", out) == 0
    side = out / "sideinfo.json"
    assert run("extract", "--manifest", tmp_path / "nope.json", "--sideinfo", side) == 2
    assert run("extract", "--manifest", out / "latin-text.json", "--sideinfo", side,
               "--algo", "algo3") == 4
    assert run("bogus") == 2


def test_no_texture_exit(tmp_path):
    import numpy as np

    from docmark.raster_io import DocumentManifest, PageImage, save_page

    save_page(PageImage(np.full((300, 300), 250, np.uint8)), tmp_path / "b.png")
    DocumentManifest(id="b", pages=["b.png"]).save(tmp_path / "b.json")
    assert run("embed", "--manifest", tmp_path / "b.json", "--out", tmp_path / "o") == 3


def test_config_file_and_flags(corpus_dir, tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("# run settings\nalgo = algo5\nseed = 3\npolicy = {\"CT\": 0.1, \"PTPG\": 0.2, \"CG\": 0.2}\n")
    out = tmp_path / "o"
    assert run("embed", "--config", cfg, "--algo", "algo2", "--manifest",
               corpus_dir / "latin-text.json", "--out", out) == 0
    assert json.loads((out / "sideinfo.json").read_text())["algo"] == "algo2"
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"algo": "algo3", "gamma": [0.9, 0.7, 0.4, 0.1]}))
    assert run("classify", "--config", js, "--manifest", corpus_dir / "latin-text.json",
               "--report", tmp_path / "cls.json") == 0
    rep = json.loads((tmp_path / "cls.json").read_text())
    assert rep["block_side"] == 128 and len(rep["pages"][0]["classes"]) == 80


def test_attack_command(corpus_dir, tmp_path):
    spec = tmp_path / "a.json"
    spec.write_text(json.dumps({"kind": "noise", "params": {"sigma": 4.0}}))
    assert run("attack", "--spec", spec, "--manifest", corpus_dir / "latin-text.json",
               "--out", tmp_path / "x", "--seed", 9) == 0
    prov = json.loads((tmp_path / "x" / "provenance.json").read_text())
    assert prov["attack"] == {"kind": "noise", "params": {"sigma": 4.0}, "seed": 9}
    assert run("attack", "--spec", tmp_path / "none.json", "--manifest",
               corpus_dir / "latin-text.json", "--out", tmp_path / "y") == 2


@pytest.mark.slow
def test_sweep_rows_and_ordering(corpus_dir, tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--manifest", corpus_dir / "latin-text.json", "--manifest",
               corpus_dir / "latin-mixed.json", "--grid", '{"jpeg": [10, 50, 90]}',
               "--algos", "algo1,algo2,algo3,algo4,algo5", "--csv", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 30
    assert set(rows[0]) == {"attack", "param", "algo", "document", "nc_overall", "psnr", "ssim"}
    nc = {(r["param"], r["document"], r["algo"]): float(r["nc_overall"]) for r in rows}
    for (param, doc, algo), v in nc.items():
        if algo == "algo2":
            assert v >= nc[(param, doc, "algo3")]


def test_fingerprint_demo(corpus_dir, tmp_path):
    rep = tmp_path / "f.json"
    assert run("fingerprint-demo", "--users", 6, "--colluders", 2, "--seed", 1,
               "--manifest", corpus_dir / "latin-mixed.json", "--report", rep) == 0
    d = json.loads(rep.read_text())
    assert len(d["per_user_nc"]) == 6 and len(d["colluders_true"]) == 2
    assert run("fingerprint-demo", "--users", 3, "--colluders", 5) == 2


def test_gen_corpus_errors(tmp_path):
    assert run("gen-corpus", "--out", tmp_path, "--languages", "klingon") == 2
    assert run("gen-corpus", "--out", tmp_path, "--layouts", "poster") == 2
