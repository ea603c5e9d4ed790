"""Command-line interface: ``ocrcorrect <subcommand> [options]``.

Data goes to stdout (or ``--output``); diagnostics go to stderr.  Exit
status is 0 on success, 1 on a data or configuration error and 2 on bad
command-line usage.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .config import Config
from .errors import OcrCorrectError, TrainingDataError, UsageError
from .evaluation import coverage_upper_bound, distinctiveness_tsv, feature_distinctiveness
from .features import candidates_for, score_matrix
from .ngrams import count_ngrams, write_ngram_file
from .ranking import Hyperparameters, RankingModel, TrainingSet, imbalance_weights, train
from .text import tokenize

logger = logging.getLogger("ocrcorrect")


def read_text(path) -> str:
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from exc


class _Output:
    """stdout, or a file opened for exact newline-preserving writes."""

    def __init__(self, path):
        self.path = path

    def __enter__(self):
        if self.path in (None, "-"):
            self.fh = None
            return sys.stdout
        self.fh = open(self.path, "w", encoding="utf-8", newline="")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def byte_offsets(text):
    """Map code-point offset ``i`` to its UTF-8 byte offset."""
    sizes = np.fromiter((len(c.encode("utf-8")) for c in text), dtype=np.int64, count=len(text))
    return np.concatenate([[0], np.cumsum(sizes)])


def _fmt(v):
    return repr(float(v))


# --- configuration ----------------------------------------------------------

def _add_config_args(p, model=False):
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--delta", type=int, help="maximum edit distance of candidates")
    p.add_argument("--window-order", type=int, help="context window size n")
    p.add_argument("--context-threshold", type=int)
    p.add_argument("--top-k", type=int, help="per-feature candidate pool size")
    p.add_argument("--search-method", choices=("trie", "scan"))
    p.add_argument("--similarity-normalization", choices=("sum-of-lengths", "product-of-lengths"))
    p.add_argument("--seed", type=int)
    if model:
        p.add_argument("--model", help="model file (JSON)")


def _config(args) -> Config:
    cfg = Config.load(args.config) if args.config else Config()
    return cfg.override(
        delta=args.delta, window_order=args.window_order, context_threshold=args.context_threshold,
        top_k=args.top_k, search_method=args.search_method,
        similarity_normalization=args.similarity_normalization, seed=args.seed,
        model=getattr(args, "model", None),
        cv_folds=getattr(args, "cv_folds", None), train_fraction=getattr(args, "train_fraction", None))


def _model(cfg) -> RankingModel:
    if not cfg.model:
        raise UsageError("no model file given (--model or config 'model')")
    return RankingModel.load(cfg.model)


# --- subcommands --------------------------------------------------------------

def cmd_build_index(args) -> int:
    if args.text:
        if not args.out_dir:
            raise UsageError("--text needs --out-dir")
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        seqs = [[t.surface for t in tokenize(read_text(p))] for p in args.text]
        for n in range(1, args.max_order + 1):
            counts = count_ngrams(seqs, n)
            write_ngram_file(counts, out / f"{n}gms.txt")
            print(f"{n}\t{out / f'{n}gms.txt'}\t{len(counts)}")
        return 0
    cfg = _config(args)
    cfg.check_files()
    uni, ctx = pipeline.load_indexes(cfg)
    print(f"1\t{len(uni)}\t{sum(c for _, c in uni.items())}")
    print(f"{ctx.order}\t{len(ctx)}\t{sum(c for _, c in ctx.items())}")
    return 0


def cmd_detect(args) -> int:
    res = pipeline.load_resources(_config(args))
    text = read_text(args.input)
    _, detections = pipeline.detect_text(text, res)
    off = byte_offsets(text)
    with _Output(args.output) as fh:
        fh.write("start\tend\tsurface\tunigram_freq\tbest_context_freq\n")
        for d in detections:
            s, e = d.span
            fh.write(f"{off[s]}\t{off[e]}\t{d.surface}\t{d.unigram_freq}\t{d.best_context_freq}\n")
    logger.info("%d errors detected", len(detections))
    return 0


def cmd_suggest(args) -> int:
    res = pipeline.load_resources(_config(args))
    text = read_text(args.input)
    _, detections = pipeline.detect_text(text, res)
    off = byte_offsets(text)
    names = res.scoring.feature_names
    with _Output(args.output) as fh:
        fh.write("start\tend\tsurface\tcandidate\t" + "\t".join(names) + "\n")
        for d in detections:
            cands = candidates_for(d.surface, res.scoring)
            mat = score_matrix(d, cands, res.scoring)
            s, e = d.span
            for term, row in zip(cands.terms, mat):
                fh.write(f"{off[s]}\t{off[e]}\t{d.surface}\t{term}\t"
                         + "\t".join(_fmt(v) for v in row) + "\n")
    return 0


def cmd_correct(args) -> int:
    cfg = _config(args)
    res = pipeline.load_resources(cfg)
    model = _model(cfg)
    text = read_text(args.input)
    corrected, corrections = pipeline.correct_text(text, res, model)
    with _Output(args.output) as fh:
        fh.write(corrected)
    if args.suggestions:
        off = byte_offsets(text)
        with _Output(args.suggestions) as fh:
            fh.write("start\tend\tsurface\trank\tcandidate\tconfidence\n")
            for c in corrections:
                s, e = c.error.span
                for r, (term, conf) in enumerate(c.suggestions[:args.suggest_k], 1):
                    fh.write(f"{off[s]}\t{off[e]}\t{c.error.surface}\t{r}\t{term}\t{_fmt(conf)}\n")
    logger.info("%d errors, %d corrected", len(corrections), sum(c.best is not None for c in corrections))
    return 0


def _labeled(args, res):
    doc = pipeline.label_document(read_text(args.ocr), read_text(args.truth), res)
    train_part, test_part = pipeline.split_errors(doc.labeled, res.config.train_fraction, res.config.seed)
    return doc, train_part, test_part


def _write_rows(path, data: TrainingSet):
    with _Output(path) as fh:
        fh.write("error_id\tcandidate\tlabel\t" + "\t".join(data.feature_names) + "\n")
        for g, term, y, row in zip(data.groups, data.terms, data.y, data.X):
            fh.write(f"{int(g)}\t{term}\t{int(y)}\t" + "\t".join(_fmt(v) for v in row) + "\n")


def _read_rows(path) -> TrainingSet:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if not header or header[:3] != ["error_id", "candidate", "label"]:
            raise TrainingDataError(f"{path}: expected header 'error_id<TAB>candidate<TAB>label<TAB>...'")
        groups, terms, y, X = [], [], [], []
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(header):
                raise TrainingDataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                groups.append(int(row[0]))
                y.append(float(row[2]))
                X.append([float(v) for v in row[3:]])
            except ValueError as exc:
                raise TrainingDataError(f"{path}:{lineno}: {exc}") from exc
            terms.append(row[1])
    y = np.array(y)
    X = np.array(X, dtype=np.float64).reshape(len(y), len(header) - 3)
    return TrainingSet(X, y, imbalance_weights(y), np.array(groups), terms, tuple(header[3:]))


def cmd_train(args) -> int:
    cfg = _config(args)
    if not cfg.model:
        raise UsageError("no output model path (--model or config 'model')")
    if args.rows:
        data = _read_rows(args.rows)
        model = train(data, Hyperparameters(**cfg.ranker), cfg.seed)
        print(f"rows\t{len(data)}\nerrors\t{len(set(data.groups.tolist()))}\n"
              f"stages\t{len(model.booster.trees)}")
    else:
        if not (args.ocr and args.truth):
            raise UsageError("train needs --ocr and --truth, or --rows")
        res = pipeline.load_resources(cfg)
        doc, train_part, _ = _labeled(args, res)
        chosen = doc.labeled if args.all_errors else train_part
        run = pipeline.train_model(chosen, res)
        model = run.model
        if args.write_rows:
            _write_rows(args.write_rows, run.data)
        print(f"errors_offered\t{run.n_errors_offered}\nerrors_used\t{run.n_errors_used}\n"
              f"rows\t{run.n_rows}\nstages\t{len(model.booster.trees)}")
        if run.cv is not None:
            for hp, score in run.cv.mean_scores.items():
                print(f"cv\tn_stages={hp.n_stages},max_depth={hp.max_depth}\t{score!r}")
            print(f"cv_best\tn_stages={run.cv.best.n_stages},max_depth={run.cv.best.max_depth}")
    if model.booster.status != "ok":
        logger.warning("training status: %s", model.booster.status)
    model.save(cfg.model)
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    res = pipeline.load_resources(cfg)
    model = _model(cfg)
    doc, _, test_part = _labeled(args, res)
    errors = doc.labeled if args.all_errors else test_part
    report = pipeline.evaluate_document(doc, errors, res, model)
    if args.tsv:
        with _Output(args.tsv) as fh:
            fh.write(report.to_tsv())
    with _Output(args.output) as fh:
        fh.write(report.to_tsv() if args.format == "tsv" else report.format_text())
    return 0


def cmd_analyze_features(args) -> int:
    cfg = _config(args)
    res = pipeline.load_resources(cfg)
    doc, _, test_part = _labeled(args, res)
    errors = test_part if args.test_only else doc.labeled
    coverage = coverage_upper_bound(errors, res.scoring, cfg.top_k)
    tables = feature_distinctiveness(errors, res.scoring, cfg.top_k)
    with _Output(args.output) as fh:
        fh.write("category\tlocated\tpercent_among_all\tpercent_in_search_scope\n")
        for cat, (n, a, s) in coverage.items():
            fh.write(f"{cat}\t{n}\t{a:.6f}\t{s:.6f}\n")
    with _Output(args.distinctiveness) as fh:
        fh.write(distinctiveness_tsv(tables, res.scoring.feature_names))
    return 0


# --- parser -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="ocrcorrect", description="OCR post-correction toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", help="build index caches, or count n-grams from text")
    _add_config_args(p)
    p.add_argument("--text", nargs="+", help="plain-text corpus files to count")
    p.add_argument("--out-dir", help="where --text writes 1gms.txt .. Ngms.txt")
    p.add_argument("--max-order", type=int, default=5)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("detect", help="report suspected errors as TSV")
    _add_config_args(p)
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("suggest", help="candidates and feature scores for every error")
    _add_config_args(p)
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("correct", help="replace each error by its top-ranked candidate")
    _add_config_args(p, model=True)
    p.add_argument("input")
    p.add_argument("-o", "--output", help="corrected text (default stdout)")
    p.add_argument("--suggestions", help="TSV of ranked suggestions per error")
    p.add_argument("--suggest-k", type=int, default=10)
    p.set_defaults(func=cmd_correct)

    for name, func, helptext in (
            ("train", cmd_train, "train a ranking model"),
            ("evaluate", cmd_evaluate, "detection and correction metrics"),
            ("analyze-features", cmd_analyze_features, "coverage and feature distinctiveness")):
        p = sub.add_parser(name, help=helptext)
        _add_config_args(p, model=name != "analyze-features")
        p.add_argument("--ocr", help="OCR text file", required=name != "train")
        p.add_argument("--truth", help="ground-truth text file", required=name != "train")
        p.add_argument("--train-fraction", type=float)
        p.set_defaults(func=func)
        if name == "train":
            p.add_argument("--rows", help="TSV of labeled feature rows instead of --ocr/--truth")
            p.add_argument("--write-rows", help="also write the generated feature rows here")
            p.add_argument("--cv-folds", type=int)
            p.add_argument("--all-errors", action="store_true", help="train on every error, no held-out split")
        elif name == "evaluate":
            p.add_argument("--all-errors", action="store_true", help="evaluate every error, not the held-out split")
            p.add_argument("--format", choices=("text", "tsv"), default="text")
            p.add_argument("--tsv", help="also write the TSV report here")
            p.add_argument("-o", "--output")
        else:
            p.add_argument("--test-only", action="store_true", help="only the held-out split")
            p.add_argument("-o", "--output", help="coverage TSV (default stdout)")
            p.add_argument("--distinctiveness", help="distinctiveness TSV (default stdout)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    reconfigure = getattr(sys.stdout, "reconfigure", None)
    if reconfigure is not None:
        reconfigure(encoding="utf-8", newline="")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except OcrCorrectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error of ours
        sys.stdout = open(os.devnull, "w")
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
