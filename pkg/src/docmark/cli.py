"""Command-line entry point: ``docmark <command> [options]``.

Exit codes: 0 success, 2 usage or configuration error, 3 nothing to embed
into, 4 side information does not match.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from docmark import attacks, corpus
from docmark.algorithms import AlgoId, AlphaPolicy
from docmark.classify import EnergyThresholds, classify_energy
from docmark.errors import (ConfigError, DocmarkError, ImageIOError, NoContent, NoTextureBlocks,
                            PayloadMismatch, SideInfoMismatch)
from docmark.fingerprint import collude_average, detect_colluders, generate_fingerprints
from docmark.metrics import psnr, ssim
from docmark.page_prep import DEFAULT_CANONICAL, ROBUST_EPS, segment
from docmark.pipeline import PipelineConfig, _canonical_luma, embed_pages, extract_pages
from docmark.raster_io import DocumentManifest, WatermarkBits, load_watermark, save_page
from docmark.sideinfo import SideInfo

EXIT_OK, EXIT_CONFIG, EXIT_NO_CONTENT, EXIT_MISMATCH = 0, 2, 3, 4


@dataclass
class RunConfig:
    algo: AlgoId = AlgoId.ALGO2
    block_side: int | None = None
    gamma: tuple = (0.9, 0.7, 0.4, 0.1)
    policy: AlphaPolicy = field(default_factory=AlphaPolicy)
    canonical: tuple = DEFAULT_CANONICAL
    watermark: str | None = None
    seed: int = 0
    out: str = "out"
    eps: float = ROBUST_EPS
    params: dict = field(default_factory=dict)

    @property
    def side(self) -> int:
        return self.block_side or self.algo.block_side

    def validate(self) -> "RunConfig":
        if self.side != self.algo.block_side:
            raise ConfigError(f"{self.algo.value} requires block side {self.algo.block_side}, "
                              f"got {self.side}")
        h, w = self.canonical
        if h % self.side or w % self.side:
            raise ConfigError(f"canonical dims {self.canonical} are not multiples of {self.side}")
        try:
            EnergyThresholds(*self.gamma)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad gamma thresholds {self.gamma}: {exc}") from None
        return self

    def pipeline(self) -> PipelineConfig:
        self.validate()
        return PipelineConfig(canonical=tuple(self.canonical), eps=self.eps,
                              thresholds=EnergyThresholds(*self.gamma), policy=self.policy,
                              params=dict(self.params), block_side=self.side)

    def mark(self) -> WatermarkBits:
        if self.watermark:
            try:
                wm = load_watermark(self.watermark)
            except (ImageIOError, DocmarkError, OSError) as exc:
                raise ConfigError(f"cannot read watermark {self.watermark}: {exc}") from None
            if wm.side != 32:
                raise ConfigError(f"watermark must be 32x32, got {wm.side}x{wm.side}")
            return wm
        return default_mark(self.seed)


def default_mark(seed: int = 0) -> WatermarkBits:
    """Balanced pseudo-random 32x32 mark derived from the run seed."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 32]))
    bits = np.zeros(1024, dtype=np.uint8)
    bits[rng.permutation(1024)[:512]] = 1
    return WatermarkBits(bits.reshape(32, 32))


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def read_config_file(path) -> dict:
    """JSON object, or plain ``key = value`` lines (``#`` starts a comment)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    s = text.strip()
    if s.startswith("{"):
        try:
            return json.loads(s)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def build_config(args) -> RunConfig:
    raw = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in ("algo", "block_side", "watermark", "seed", "out", "eps"):
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    for kv in getattr(args, "set", None) or []:
        if "=" not in kv:
            raise ConfigError(f"--set expects key=value, got {kv!r}")
        k, v = kv.split("=", 1)
        raw[k.strip()] = _parse_value(v.strip())
    known = {"algo", "block_side", "gamma", "policy", "alpha", "canonical", "watermark", "seed",
             "out", "eps", "params"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    try:
        cfg = RunConfig(
            algo=AlgoId.parse(raw.get("algo", "algo2")),
            block_side=int(raw["block_side"]) if raw.get("block_side") is not None else None,
            gamma=tuple(float(g) for g in raw.get("gamma", (0.9, 0.7, 0.4, 0.1))),
            policy=AlphaPolicy.from_dict(raw.get("policy", raw.get("alpha", {}))),
            canonical=tuple(int(x) for x in raw.get("canonical", DEFAULT_CANONICAL)),
            watermark=raw.get("watermark"),
            seed=int(raw.get("seed", 0)),
            out=str(raw.get("out", "out")),
            eps=float(raw.get("eps", ROBUST_EPS)),
            params=dict(raw.get("params", {})),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def _load_manifest(path) -> DocumentManifest:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"manifest {path} does not exist")
    try:
        m = DocumentManifest.load(p)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad manifest {path}: {exc}") from None
    missing = [str(q) for q in m.page_paths() if not q.is_file()]
    if missing:
        raise ConfigError(f"manifest {path} lists missing pages: {missing}")
    return m


def _load_sideinfo(path) -> SideInfo:
    if not Path(path).is_file():
        raise ConfigError(f"side information {path} does not exist")
    return SideInfo.load(path)


def _write_pages(pages, outdir: Path, doc_id: str, language: str = "") -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    names = []
    for i, p in enumerate(pages):
        name = f"{doc_id}-p{i + 1:02d}.png"
        save_page(p, outdir / name)
        names.append(name)
    mpath = outdir / f"{doc_id}.json"
    DocumentManifest(id=doc_id, pages=names, language=language).save(mpath)
    return mpath


def _emit(obj, out_path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_embed(args) -> int:
    cfg = build_config(args)
    m = _load_manifest(args.manifest)
    pages, info = embed_pages(m.load_pages(), cfg.mark(), cfg.algo, cfg.pipeline())
    out = Path(cfg.out)
    mpath = _write_pages(pages, out, m.id, m.language)
    info.save(out / "sideinfo.json")
    _emit({"manifest": str(mpath), "sideinfo": str(out / "sideinfo.json"),
           "texture_blocks": info.texture_blocks, "algo": cfg.algo.value})
    return EXIT_OK


def cmd_extract(args) -> int:
    m = _load_manifest(args.manifest)
    info = _load_sideinfo(args.sideinfo)
    algo = AlgoId.parse(args.algo) if args.algo else None
    res = extract_pages(m.load_pages(), info, algo)
    _emit(res.report.to_dict(), args.report)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    orig = _load_manifest(args.original).load_pages()
    sus = _load_manifest(args.suspect).load_pages()
    if len(orig) != len(sus):
        raise ConfigError("original and suspect documents have different page counts")
    info = _load_sideinfo(args.sideinfo)
    res = extract_pages(sus, info, AlgoId.parse(args.algo) if args.algo else None)
    same = all(a.shape == b.shape for a, b in zip(orig, sus))
    out = {
        "psnr_db": round(float(np.mean([psnr(a, b) for a, b in zip(orig, sus)])), 6) if same else None,
        "ssim": round(float(np.mean([ssim(a, b) for a, b in zip(orig, sus)])), 6) if same else None,
        "nc_blocks": [round(v, 6) for v in res.report.nc_blocks],
        "nc_overall": round(res.nc_overall, 6),
    }
    _emit(out, args.report)
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = build_config(args)
    m = _load_manifest(args.manifest)
    pc = cfg.pipeline()
    pages = []
    for i, page in enumerate(m.load_pages()):
        try:
            margins, _, canon = _canonical_luma(page, pc)
        except NoContent:
            pages.append({"page": i, "margins": None, "classes": []})
            continue
        grid = segment(canon, cfg.side)
        classes = [str(classify_energy(b, pc.thresholds)) for b in grid.blocks]
        pages.append({"page": i, "margins": margins.as_dict(), "rows": grid.rows,
                      "cols": grid.cols, "classes": classes})
    _emit({"document": m.id, "block_side": cfg.side, "pages": pages}, args.report)
    return EXIT_OK


def _read_spec(text: str) -> attacks.AttackSpec:
    p = Path(text)
    if p.suffix == ".json" and not p.is_file():
        raise ConfigError(f"attack spec {text} does not exist")
    if p.is_file():
        text = p.read_text()
    return attacks.AttackSpec.from_json(text)


def cmd_attack(args) -> int:
    spec = _read_spec(args.spec)
    if args.seed is not None:
        spec.seed = int(args.seed)
    m = _load_manifest(args.manifest)
    pages = spec.apply(m.load_pages())
    out = Path(args.out)
    mpath = _write_pages(pages, out, m.id, m.language)
    _emit({"source": m.id, "manifest": str(mpath), "attack": spec.to_dict()},
          out / "provenance.json")
    return EXIT_OK


def _expand_grid(grid) -> list:
    """Accept a list of specs or ``{kind: [param dicts or scalars]}``."""
    primary = {"jpeg": "quality", "noise": "sigma", "rotate": "degrees", "print_screen": "quality",
               "scale": "fx", "stitch_columns": "gap_delta"}
    specs = []
    if isinstance(grid, dict):
        for kind in grid:
            for v in grid[kind]:
                params = v if isinstance(v, dict) else {primary.get(kind, "value"): v}
                specs.append(attacks.AttackSpec(kind, dict(params)))
    else:
        specs = [attacks.AttackSpec.from_dict(d) for d in grid]
    return specs


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    text = args.grid
    if Path(text).is_file():
        text = Path(text).read_text()
    try:
        grid = _expand_grid(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"attack grid is not valid JSON: {exc}") from None
    if not grid:
        raise ConfigError("attack grid is empty")
    algos = [AlgoId.parse(a) for a in (args.algos.split(",") if args.algos else [cfg.algo.value])]
    docs = [_load_manifest(p) for p in args.manifest]
    mark = cfg.mark()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["attack", "param", "algo", "document", "nc_overall", "psnr", "ssim"])
    for spec in grid:
        spec.seed = cfg.seed
        for algo in algos:
            pc = RunConfig(algo=algo, gamma=cfg.gamma, policy=cfg.policy, canonical=cfg.canonical,
                           eps=cfg.eps, params=cfg.params).pipeline()
            for m in docs:
                original = m.load_pages()
                wm, info = embed_pages(original, mark, algo, pc)
                sus = spec.apply(wm)
                nc = extract_pages(sus, info, algo).nc_overall
                same = len(sus) == len(original) and all(a.shape == b.shape for a, b in zip(original, sus))
                q = float(np.mean([psnr(a, b) for a, b in zip(original, sus)])) if same else float("nan")
                s = float(np.mean([ssim(a, b) for a, b in zip(original, sus)])) if same else float("nan")
                param = json.dumps(spec.params, sort_keys=True)
                w.writerow([spec.kind, param, algo.value, m.id, f"{nc:.6f}",
                            "" if np.isnan(q) else f"{q:.4f}", "" if np.isnan(s) else f"{s:.6f}"])
    out = Path(args.csv) if args.csv else Path(cfg.out) / "sweep.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue())
    return EXIT_OK


def cmd_fingerprint_demo(args) -> int:
    cfg = build_config(args)
    if not 1 <= args.colluders <= args.users:
        raise ConfigError("need 1 <= colluders <= users")
    if args.manifest:
        pages = _load_manifest(args.manifest).load_pages()
    else:
        pages = [corpus.gen_page("mixed", "latin", cfg.seed)]
    fps = generate_fingerprints(args.users, 32, cfg.seed)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7]))
    colluders = sorted(int(u) for u in rng.choice(args.users, size=args.colluders, replace=False))
    pc = RunConfig(algo=AlgoId.ALGO2, gamma=cfg.gamma, policy=cfg.policy, canonical=cfg.canonical,
                   eps=cfg.eps, params=cfg.params).pipeline()
    copies, infos = {}, []
    for u, mark in enumerate(fps.marks):
        wm, info = embed_pages(pages, mark, AlgoId.ALGO2, pc)
        infos.append(info)
        if u in colluders:
            copies[u] = wm
    colluded = collude_average([copies[u] for u in colluders])
    det = detect_colluders(colluded, infos, fps, args.threshold)
    _emit({"users": args.users, "colluders_true": colluders, "colluders_detected": det.flagged,
           "threshold": args.threshold, "per_user_nc": [round(v, 6) for v in det.per_user_nc]},
          args.report)
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    langs = tuple(args.languages.split(","))
    layouts = tuple(x for x in args.layouts.split(",") if x)
    if not layouts:
        raise ConfigError("at least one layout is required")
    for x in langs:
        if x not in corpus.SCRIPTS:
            raise ConfigError(f"unknown language {x!r}; choose from {sorted(corpus.SCRIPTS)}")
    for x in layouts:
        if x not in corpus.LAYOUTS:
            raise ConfigError(f"unknown layout {x!r}; choose from {list(corpus.LAYOUTS)}")
    paths = corpus.gen_corpus(args.out, langs, args.pages, layouts, args.seed)
    _emit({"manifests": [str(p) for p in paths]})
    return EXIT_OK


def _common(p, config=True):
    if config:
        p.add_argument("--config", help="JSON or key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--algo", help="algo1..algo5")
        p.add_argument("--block-side", dest="block_side", type=int)
        p.add_argument("--watermark", help="32x32 binary watermark image")
        p.add_argument("--eps", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="docmark", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="watermark a document")
    _common(p)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover the watermark and report NC")
    p.add_argument("--manifest", required=True, help="suspect document")
    p.add_argument("--sideinfo", required=True)
    p.add_argument("--algo")
    p.add_argument("--report", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="PSNR/SSIM against the original plus NC")
    p.add_argument("--original", required=True)
    p.add_argument("--suspect", required=True)
    p.add_argument("--sideinfo", required=True)
    p.add_argument("--algo")
    p.add_argument("--report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", help="print the block classes of each page")
    _common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("attack", help="apply an attack spec to a document")
    p.add_argument("--spec", required=True, help="JSON text or a .json file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("sweep", help="embed, attack and extract over a grid; writes CSV")
    _common(p)
    p.add_argument("--manifest", action="append", required=True)
    p.add_argument("--grid", required=True, help="JSON text or file")
    p.add_argument("--algos", help="comma list; default: the configured algo")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fingerprint-demo", help="average-collusion detection demo")
    _common(p)
    p.add_argument("--users", type=int, default=100)
    p.add_argument("--colluders", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.25)
    p.add_argument("--manifest")
    p.add_argument("--report")
    p.set_defaults(func=cmd_fingerprint_demo)

    p = sub.add_parser("gen-corpus", help="write the synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--languages", default="latin")
    p.add_argument("--layouts", default="text")
    p.add_argument("--pages", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_corpus)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoTextureBlocks as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONTENT
    except (SideInfoMismatch, PayloadMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (DocmarkError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
