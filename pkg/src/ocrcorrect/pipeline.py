"""End-to-end glue: resources from a config, detection over text,
ground-truth labeling, correction and evaluation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .candidates import Lexicon
from .config import Config
from .detection import DetectionThresholds, detect
from .errors import UsageError
from .evaluation import (BOUNDED, DEFAULT_NS, FALSE_POSITIVE, MISSED, MetricsReport, UNBOUNDED,
                         align, categorize, count_correct_words, coverage_upper_bound,
                         precision_by_category, summarize_detection)
from .features import ScoringResources
from .ngrams import load_or_build
from .ranking import (Hyperparameters, LabeledError, RankingModel, TrainingSet, build_training_set,
                      candidate_pool, cross_validate, rank_terms, train)
from .text import FilterConfig, TokenizerRules, apply_filters, tokenize

logger = logging.getLogger(__name__)


@dataclass
class Resources:
    """Everything loaded once per run."""

    config: Config
    scoring: ScoringResources
    thresholds: DetectionThresholds
    rules: TokenizerRules
    filters: FilterConfig

    @property
    def unigrams(self):
        return self.scoring.unigrams

    @property
    def contexts(self):
        return self.scoring.contexts


def _cache_path(config, name):
    if not config.cache_dir:
        return None
    Path(config.cache_dir).mkdir(parents=True, exist_ok=True)
    return Path(config.cache_dir) / name


def load_indexes(config: Config):
    """(unigram index, context index), through the cache when configured."""
    unigrams = load_or_build(config.unigram_files, 1, _cache_path(config, "unigrams.idx"))
    contexts = load_or_build(config.ngram_files, config.window_order,
                             _cache_path(config, f"{config.window_order}grams.idx"))
    return unigrams, contexts


def load_resources(config: Config, unigrams=None, contexts=None) -> Resources:
    """Build :class:`Resources`; pre-built indexes may be passed in directly."""
    if unigrams is None or contexts is None:
        config.check_files()
        unigrams, contexts = load_indexes(config)
    else:
        config.check_files(need_indexes=False)
    if config.lexicon:
        lexicon = Lexicon.from_file(config.lexicon, name="english")
    else:
        lexicon = Lexicon.from_unigrams(unigrams, config.lexicon_min_count)
    existence = tuple(Lexicon.from_file(e["path"], e.get("name")) for e in config.existence_lexicons)
    filter_opts = dict(config.filters)
    if config.common_words:
        filters = FilterConfig.from_file(config.common_words, **filter_opts)
    else:
        filters = FilterConfig(**filter_opts)
    scoring = ScoringResources(
        unigrams, contexts, lexicon, existence, config.delta, tuple(config.alphas),
        config.similarity_normalization, config.casefold_search, config.search_method,
        config.search_existence_lexicons, tuple(config.disabled_features))
    thresholds = DetectionThresholds(dict(config.unigram_thresholds), config.context_threshold,
                                     config.window_order)
    return Resources(config, scoring, thresholds, TokenizerRules.from_dict(config.tokenizer), filters)


def prepare_tokens(text, res: Resources):
    return apply_filters(tokenize(text, res.rules), res.filters)


def detect_text(text, res: Resources):
    """(tokens, detected errors) for ``text``."""
    tokens = prepare_tokens(text, res)
    return tokens, detect(tokens, res.contexts, res.unigrams, res.thresholds)


@dataclass
class LabeledDocument:
    tokens: list
    detections: list
    truth: list
    outcomes: list
    labeled: list

    @property
    def correct_words(self):
        return count_correct_words(self.tokens, self.truth)


def label_document(ocr_text, truth_text, res: Resources) -> LabeledDocument:
    """Detect errors in ``ocr_text`` and attach intended words from ``truth_text``.

    Every counted detection becomes a :class:`LabeledError`; false
    positives get their own surface as the intended word.
    """
    tokens, detections = detect_text(ocr_text, res)
    truth = align(tokenize(ocr_text, res.rules), tokenize(truth_text, res.rules))
    outcomes = categorize(detections, truth)
    labeled = []
    for o in outcomes:
        if o.category == MISSED or not o.counted:
            continue
        labeled.append(LabeledError(o.detected, o.intended, o.category, len(labeled)))
    return LabeledDocument(tokens, detections, truth, outcomes, labeled)


def split_errors(labeled: Sequence[LabeledError], train_fraction: float = 0.8, seed: int = 0):
    """Seeded (train, test) split of whole errors."""
    if not 0.0 < train_fraction < 1.0:
        raise UsageError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(len(labeled))
    cut = int(round(train_fraction * len(labeled)))
    train_ids = set(perm[:cut].tolist())
    train_part = [e for i, e in enumerate(labeled) if i in train_ids]
    test_part = [e for i, e in enumerate(labeled) if i not in train_ids]
    return train_part, test_part


@dataclass
class TrainingRun:
    model: RankingModel
    data: TrainingSet
    n_errors_offered: int
    cv: Optional[object] = None

    @property
    def n_rows(self):
        return len(self.data)

    @property
    def n_errors_used(self):
        return len(self.data.errors)


def train_model(labeled: Sequence[LabeledError], res: Resources) -> TrainingRun:
    cfg = res.config
    data = build_training_set(labeled, res.scoring, cfg.top_k)
    hyper = Hyperparameters(**cfg.ranker)
    cv = None
    if cfg.cv_folds:
        grid = {k: tuple(v) for k, v in cfg.cv_grid.items()}
        cv = cross_validate(data, grid, cfg.cv_folds, cfg.seed)
        hyper = Hyperparameters(**{**cfg.ranker, **{k: getattr(cv.best, k) for k in grid}})
    model = train(data, hyper, cfg.seed)
    return TrainingRun(model, data, len(labeled), cv)


def ranked_candidates(error, res: Resources, model: RankingModel):
    """[(term, confidence)] for ``error``'s candidate pool, best first."""
    terms, matrix = candidate_pool(error, res.scoring, res.config.top_k)
    return rank_terms(model, terms, matrix)


@dataclass
class Correction:
    error: object
    suggestions: list

    @property
    def best(self):
        return self.suggestions[0][0] if self.suggestions else None


def correct_text(text: str, res: Resources, model: RankingModel):
    """(corrected text, corrections): each detected error with at least one
    candidate is replaced by its top-ranked candidate."""
    _, detections = detect_text(text, res)
    corrections = [Correction(d, ranked_candidates(d, res, model)) for d in detections]
    out, pos = [], 0
    for c in corrections:
        if c.best is None:
            continue
        start, end = c.error.span
        out.append(text[pos:start])
        out.append(c.best)
        pos = end
    out.append(text[pos:])
    return "".join(out), corrections


def evaluate_document(doc: LabeledDocument, errors: Sequence[LabeledError], res: Resources,
                      model: RankingModel, ns=DEFAULT_NS, with_coverage=True) -> MetricsReport:
    """Detection metrics over the whole document, correction metrics over ``errors``."""
    detection = summarize_detection(doc.outcomes, doc.correct_words)
    ranked = [[t for t, _ in ranked_candidates(e.error, res, model)] for e in errors]
    correction = precision_by_category(ranked, [e.intended for e in errors],
                                       [e.category for e in errors], ns)
    coverage = coverage_upper_bound(errors, res.scoring, res.config.top_k) if with_coverage else {}
    return MetricsReport(detection, correction, coverage, tuple(ns))


__all__ = [
    "BOUNDED", "UNBOUNDED", "FALSE_POSITIVE", "MISSED", "Resources", "LabeledDocument",
    "TrainingRun", "Correction", "load_indexes", "load_resources", "prepare_tokens",
    "detect_text", "label_document", "split_errors", "train_model", "ranked_candidates",
    "correct_text", "evaluate_document",
]
