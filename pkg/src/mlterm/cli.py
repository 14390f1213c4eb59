"""Command-line pipeline driver.

Every subcommand takes ``--config FILE`` (flat ``key = value`` lines) and
flag overrides; precedence is flags > file > defaults. Output files start
with a ``##`` header carrying the config hash and seed, and a
``<output>.manifest.json`` is written next to each one.

Exit codes: 0 success, 2 input error, 3 config error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .align import (
    align,
    candidates_tsv,
    precision_at_n,
    rank_candidates,
    read_gold_pairs,
    read_ranked_pairs,
    terms_from_labels,
)
from .corpus import (
    load_column_corpus,
    load_line_corpus,
    load_parallel_corpus,
    read_column_blocks,
    side_corpus,
)
from .crf import CrfModel, TrainConfig, tag, train
from .crf._backend import BACKEND
from .errors import ConfigError, InputError, MltermError
from .eval import EvalReport, FoldResult, kfold, score
from .features import FeatureConfig, extract_features, read_feature_matrix, write_feature_matrix
from .ngram import candidates_tsv as ngram_tsv
from .ngram import extract_ngrams
from .termhood import TermhoodTable, corpus_termhood_report

log = logging.getLogger("mlterm")

# key: (type, default, help). Keys double as config-file keys and --flags.
COMMON = {
    "seed": (int, 0, "random seed (recorded in every output header)"),
    "output": (str, None, "output file (stdout when omitted)"),
}
CRF_OPTS = {
    "sigma2": (float, 10.0, "L2 prior variance"),
    "max_iterations": (int, 200, "L-BFGS iteration cap"),
    "tolerance": (float, 1e-4, "stop when ||grad|| / n_weights falls below this"),
    "memory": (int, 10, "L-BFGS history size"),
    "bin_count": (int, 16, "quantile bins per numeric feature"),
}
NGRAM_OPTS = {
    "max_n": (int, 4, "longest n-gram"),
    "min_count": (int, 2, "minimum domain count"),
    "stoplist": (str, None, "file with one stopword per line"),
    "noun_final": (str, "auto", "require noun-final candidates: auto|yes|no"),
}
COMMANDS = {
    "stats": ("sentence-termhood comparison of named corpora", {
        "corpus": (str, None, "NAME=PATH, repeatable (comma-separated in config files)"),
        "background": (str, None, "background column corpus"),
        "domain": (str, None, "shared domain corpus (default: each corpus itself)"),
        "format": (str, "column", "corpus file format: column|line"),
    }),
    "termhood": ("per-word termhood table", {
        "domain": (str, None, "domain column corpus"),
        "background": (str, None, "background column corpus (may be empty)"),
        "format": (str, "column", "corpus file format: column|line"),
    }),
    "features": ("emit the feature matrix of a column corpus", {
        "corpus": (str, None, "column corpus to featurise (3rd column = BIO labels)"),
        "domain": (str, None, "domain corpus for termhood (default: --corpus)"),
        "background": (str, None, "background column corpus"),
        "features": (str, "all", "feature group name or comma-separated feature list"),
    }),
    "train": ("train a CRF on a labeled feature file", {
        "input": (str, None, "labeled feature file"),
        **CRF_OPTS,
    }),
    "tag": ("tag a feature file with a trained model", {
        "model": (str, None, "model file written by train"),
        "input": (str, None, "feature file"),
    }),
    "eval": ("span P/R/F1 of a tagged file against gold", {
        "system": (str, None, "tagged file (last column = label)"),
        "gold": (str, None, "gold file (last column = label)"),
    }),
    "xval": ("k-fold cross-validation on a labeled feature file", {
        "input": (str, None, "labeled feature file"),
        "k": (int, 10, "number of folds"),
        **CRF_OPTS,
    }),
    "ngram": ("n-gram term candidates", {
        "corpus": (str, None, "domain corpus"),
        "background": (str, None, "background corpus"),
        "format": (str, "column", "corpus file format: column|line"),
        **NGRAM_OPTS,
    }),
    "align": ("termhood-weighted bilingual term alignment", {
        "src": (str, None, "source side of the parallel corpus (one sentence per line)"),
        "tgt": (str, None, "target side of the parallel corpus"),
        "src_background": (str, None, "source-language background corpus (line format)"),
        "tgt_background": (str, None, "target-language background corpus (line format)"),
        "src_domain": (str, None, "source domain corpus (default: --src)"),
        "tgt_domain": (str, None, "target domain corpus (default: --tgt)"),
        "src_terms": (str, None, "source term list, one space-joined term per line"),
        "tgt_terms": (str, None, "target term list"),
        "src_tagged": (str, None, "tagged column file whose B/I spans give source terms"),
        "min_cooc": (int, 2, "minimum co-occurring sentence pairs"),
        "ratio_cap": (float, None, "drop pairs whose termhood ratio exceeds this"),
        "theta": (float, None, "keep pairs scoring at least theta"),
        "top_k": (int, None, "keep the first k pairs"),
        "rank_by": (str, "association", "association|logl"),
        **NGRAM_OPTS,
    }),
    "eval-align": ("P@N of a ranked candidate file", {
        "candidates": (str, None, "candidate TSV written by align"),
        "gold": (str, None, "gold TSV: c, e, 1|0"),
        "n": (int, 500, "cutoff N"),
    }),
}
PATH_KEYS = {"background", "domain", "input", "model", "system", "gold", "src", "tgt",
             "src_background", "tgt_background", "src_domain", "tgt_domain", "src_terms",
             "tgt_terms", "src_tagged", "candidates", "stoplist"}
UNHASHED = {"output"}


def _flag(key):
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlterm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mlterm {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value config file")
        for key, (typ, default, h) in {**opts, **COMMON}.items():
            extra = {"action": "append"} if (name == "stats" and key == "corpus") else {}
            names = [_flag(key)] + {"output": ["-o"], "n": ["-n"]}.get(key, [])
            p.add_argument(*names, dest=key, type=typ, default=None,
                           help=f"{h} (default: {default})", **extra)
    return parser


def read_config_file(path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such config file: {path}")
    out = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    opts = {**COMMANDS[command][1], **COMMON}
    cfg = {k: d for k, (_, d, _) in opts.items()}
    if args.config:
        for k, v in read_config_file(args.config).items():
            if k not in opts:
                raise ConfigError(f"unknown config key {k!r} for {command}")
            typ = opts[k][0]
            if command == "stats" and k == "corpus":
                cfg[k] = [s.strip() for s in v.split(",") if s.strip()]
                continue
            try:
                cfg[k] = typ(v)
            except ValueError:
                raise ConfigError(f"config key {k}: cannot parse {v!r} as {typ.__name__}") from None
    for k in opts:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def config_hash(command: str, cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k not in UNHASHED}
    body["command"] = command
    return hashlib.sha256(json.dumps(body, sort_keys=True, ensure_ascii=False).encode()).hexdigest()[:16]


def _require(cfg, *keys):
    missing = [_flag(k) for k in keys if cfg.get(k) in (None, [], "")]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join(missing)}")


def _check_paths(cfg):
    for k in sorted(PATH_KEYS):
        v = cfg.get(k)
        if v and not Path(v).is_file():
            raise InputError(f"no such file: {v} (--{k.replace('_', '-')})")
    corpus = cfg.get("corpus")
    paths = [c.split("=", 1)[-1] for c in corpus] if isinstance(corpus, list) else [corpus]
    for path in paths:
        if path and not Path(path).is_file():
            raise InputError(f"no such file: {path} (--corpus)")


class Run:
    """Per-invocation context: effective config, hash, seed and output handling."""

    def __init__(self, command, cfg):
        self.command = command
        self.cfg = cfg
        self.hash = config_hash(command, cfg)
        self.seed = cfg["seed"]

    @property
    def header(self) -> list[str]:
        return [f"mlterm {self.command} version={__version__} config_hash={self.hash} seed={self.seed}"]

    def header_text(self) -> str:
        return "".join(f"## {h}\n" for h in self.header)

    def emit(self, body: str) -> None:
        out = self.cfg.get("output")
        if out:
            Path(out).write_text(self.header_text() + body, encoding="utf-8")
            self.manifest()
        else:
            sys.stdout.write(self.header_text() + body)

    def manifest(self) -> None:
        out = self.cfg.get("output")
        if not out:
            return
        doc = {
            "command": self.command,
            "config": {k: v for k, v in self.cfg.items() if k not in UNHASHED},
            "config_hash": self.hash,
            "seed": self.seed,
            "backend": BACKEND,
            "versions": {"mlterm": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
        }
        Path(out + ".manifest.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def _load(path, fmt, role, allow_empty=False):
    if fmt == "column":
        return load_column_corpus(path, role, allow_empty)
    if fmt == "line":
        return load_line_corpus(path, role, allow_empty)
    raise ConfigError(f"unknown corpus format {fmt!r}")


def _train_config(cfg) -> TrainConfig:
    return TrainConfig(sigma2=cfg["sigma2"], max_iterations=cfg["max_iterations"],
                       tolerance=cfg["tolerance"], memory=cfg["memory"], bin_count=cfg["bin_count"])


def cmd_stats(run: Run):
    cfg = run.cfg
    _require(cfg, "corpus", "background")
    corpora = []
    for item in cfg["corpus"]:
        if "=" not in item:
            raise ConfigError(f"--corpus expects NAME=PATH, got {item!r}")
        name, path = item.split("=", 1)
        corpora.append((name, _load(path, cfg["format"], "domain")))
    bg = _load(cfg["background"], cfg["format"], "background")
    dom = _load(cfg["domain"], cfg["format"], "domain") if cfg["domain"] else None
    rows = corpus_termhood_report(corpora, bg, dom)
    lines = ["name\tsentences\tavg_freq_d\tavg_freq_b\tavg_count_d\tavg_count_b\tmean_termhood"]
    for r in rows:
        lines.append(f"{r.name}\t{r.sentences}\t{r.avg_freq_d!r}\t{r.avg_freq_b!r}\t"
                     f"{r.avg_count_d!r}\t{r.avg_count_b!r}\t{r.mean_termhood!r}")
    run.emit("\n".join(lines) + "\n")


def cmd_termhood(run: Run):
    cfg = run.cfg
    _require(cfg, "domain", "background")
    dom = _load(cfg["domain"], cfg["format"], "domain")
    bg = _load(cfg["background"], cfg["format"], "background", allow_empty=True)
    table = TermhoodTable.from_corpora(dom, bg)
    lines = ["word\tc_d\tc_b\tf_d\tf_b\tr_d\tr_b\tdelta_f\tdelta_r\tdelta_r_c"]
    for r in table.sorted_records():
        lines.append(f"{r.word}\t{r.c_d}\t{r.c_b}\t{r.f_d!r}\t{r.f_b!r}\t{r.r_d!r}\t{r.r_b!r}\t"
                     f"{r.delta_f!r}\t{r.delta_r!r}\t{r.delta_r_c!r}")
    run.emit("\n".join(lines) + "\n")


def cmd_features(run: Run):
    cfg = run.cfg
    _require(cfg, "corpus", "background", "output")
    fc = FeatureConfig.parse(cfg["features"])
    corpus = load_column_corpus(cfg["corpus"], "domain")
    dom = load_column_corpus(cfg["domain"], "domain") if cfg["domain"] else corpus
    bg = load_column_corpus(cfg["background"], "background", allow_empty=True)
    matrix = extract_features(corpus, TermhoodTable.from_corpora(dom, bg), fc)
    write_feature_matrix(matrix, cfg["output"], run.header)
    run.manifest()


def cmd_train(run: Run):
    cfg = run.cfg
    _require(cfg, "input", "output")
    matrix = read_feature_matrix(cfg["input"])
    model = train(matrix, _train_config(cfg))
    model.meta["seed"] = run.seed
    model.meta["run_config_hash"] = run.hash
    model.save(cfg["output"], run.header)
    run.manifest()


def cmd_tag(run: Run):
    cfg = run.cfg
    _require(cfg, "model", "input", "output")
    model = CrfModel.load(cfg["model"])
    matrix = read_feature_matrix(cfg["input"])
    write_feature_matrix(tag(model, matrix), cfg["output"], run.header)
    run.manifest()


def _label_column(path):
    return [[row[-1] for row in block] for block in read_column_blocks(path)]


def cmd_eval(run: Run):
    cfg = run.cfg
    _require(cfg, "system", "gold")
    gold = _label_column(cfg["gold"])
    report = EvalReport([FoldResult(0, len(gold), score(_label_column(cfg["system"]), gold))])
    run.emit(report.to_tsv())
    if cfg.get("output"):
        sys.stdout.write(report.to_text())


def cmd_xval(run: Run):
    cfg = run.cfg
    _require(cfg, "input")
    matrix = read_feature_matrix(cfg["input"])
    report = kfold(matrix, cfg["k"], run.seed, _train_config(cfg))
    run.emit(report.to_tsv())
    if cfg.get("output"):
        sys.stdout.write(report.to_text())


def _stoplist(cfg):
    if not cfg.get("stoplist"):
        return frozenset()
    return frozenset(w.strip() for w in Path(cfg["stoplist"]).read_text(encoding="utf-8").split())


def _noun_final(cfg):
    v = cfg["noun_final"]
    if v not in ("auto", "yes", "no"):
        raise ConfigError(f"--noun-final must be auto, yes or no (got {v!r})")
    return {"auto": None, "yes": True, "no": False}[v]


def cmd_ngram(run: Run):
    cfg = run.cfg
    _require(cfg, "corpus", "background")
    corpus = _load(cfg["corpus"], cfg["format"], "domain")
    bg = _load(cfg["background"], cfg["format"], "background", allow_empty=True)
    cands = extract_ngrams(corpus, bg, cfg["max_n"], cfg["min_count"], _stoplist(cfg), _noun_final(cfg))
    run.emit(ngram_tsv(cands))


def _term_list(path):
    return {tuple(line.split()) for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")}


def cmd_align(run: Run):
    cfg = run.cfg
    _require(cfg, "src", "tgt", "src_background", "tgt_background")
    if cfg["rank_by"] not in ("association", "logl"):
        raise ConfigError("--rank-by must be association or logl")
    pairs = load_parallel_corpus(cfg["src"], cfg["tgt"])
    src_dom = load_line_corpus(cfg["src_domain"]) if cfg["src_domain"] else side_corpus(pairs, "source")
    tgt_dom = load_line_corpus(cfg["tgt_domain"]) if cfg["tgt_domain"] else side_corpus(pairs, "target")
    src_bg = load_line_corpus(cfg["src_background"], "background", allow_empty=True)
    tgt_bg = load_line_corpus(cfg["tgt_background"], "background", allow_empty=True)
    stop, nf = _stoplist(cfg), _noun_final(cfg)

    def ngram_terms(dom, bg):
        return {c.tokens for c in extract_ngrams(dom, bg, cfg["max_n"], cfg["min_count"], stop, nf)}

    if cfg["src_terms"]:
        src_terms = _term_list(cfg["src_terms"])
    elif cfg["src_tagged"]:
        blocks = read_column_blocks(cfg["src_tagged"])
        src_terms = terms_from_labels([[r[0] for r in b] for b in blocks], [[r[-1] for r in b] for b in blocks])
    else:
        src_terms = ngram_terms(src_dom, src_bg)
    tgt_terms = _term_list(cfg["tgt_terms"]) if cfg["tgt_terms"] else ngram_terms(tgt_dom, tgt_bg)
    cands = align(pairs, src_terms, tgt_terms, src_dom, src_bg, tgt_dom, tgt_bg,
                  cfg["min_cooc"], ratio_cap=cfg["ratio_cap"])
    cands = rank_candidates(cands, cfg["theta"], cfg["top_k"], cfg["rank_by"])
    run.emit(candidates_tsv(cands))


def cmd_eval_align(run: Run):
    cfg = run.cfg
    _require(cfg, "candidates", "gold")
    ranked = read_ranked_pairs(cfg["candidates"])
    p = precision_at_n(ranked, read_gold_pairs(cfg["gold"]), cfg["n"])
    text = f"P@{cfg['n']}\t{p:.4f}\n"
    if cfg.get("output"):
        run.emit(text)
    sys.stdout.write(text)


HANDLERS = {
    "stats": cmd_stats, "termhood": cmd_termhood, "features": cmd_features,
    "train": cmd_train, "tag": cmd_tag, "eval": cmd_eval, "xval": cmd_xval,
    "ngram": cmd_ngram, "align": cmd_align, "eval-align": cmd_eval_align,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args.command, args)
        _check_paths(cfg)
        HANDLERS[args.command](Run(args.command, cfg))
    except MltermError as e:
        print(f"mlterm {args.command}: error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
