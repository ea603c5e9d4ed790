"""OCR post-correction: error detection, candidate search, feature scoring
and boosted-tree candidate ranking."""

from .boosting import AdaBoostR2, RegressionTree, weighted_median
from .candidates import CandidateSet, Lexicon, levenshtein, search, search_lexicons
from .config import Config
from .detection import DetectedError, DetectionThresholds, collect_contexts, detect
from .errors import (ConfigError, ModelFormatError, NgramParseError, OcrCorrectError, SchemaError,
                     ScoringError, TrainingDataError, UsageError)
from .evaluation import (DetectionOutcome, GroundTruthError, MetricsReport, align, categorize,
                         coverage_upper_bound, feature_distinctiveness, precision_at)
from .features import (Candidate, FeatureVector, ScoringResources, edit_distance_score,
                       exact_context_score, language_popularity, lexicon_existence,
                       relaxed_context_score, score_all, string_similarity_score)
from .ngrams import NgramIndex, build_index, count_ngrams, load_or_build
from .ranking import (Hyperparameters, LabeledError, RankingModel, TrainingSet, build_training_set,
                      cross_validate, predict, rank, train)
from .synthetic import NoiseSpec, make_vocabulary, markov_corpus, restore, synth_corrupt
from .text import FilterConfig, Token, TokenizerRules, apply_filters, detokenize, tokenize

__version__ = "0.1.0"

__all__ = [
    "AdaBoostR2", "RegressionTree", "weighted_median", "CandidateSet", "Lexicon", "levenshtein",
    "search", "search_lexicons", "Config", "DetectedError", "DetectionThresholds",
    "collect_contexts", "detect", "ConfigError", "ModelFormatError", "NgramParseError",
    "OcrCorrectError", "SchemaError", "ScoringError", "TrainingDataError", "UsageError",
    "DetectionOutcome", "GroundTruthError", "MetricsReport", "align", "categorize",
    "coverage_upper_bound", "feature_distinctiveness", "precision_at", "Candidate", "FeatureVector",
    "ScoringResources", "edit_distance_score", "exact_context_score", "language_popularity",
    "lexicon_existence", "relaxed_context_score", "score_all", "string_similarity_score",
    "NgramIndex", "build_index", "count_ngrams", "load_or_build", "Hyperparameters", "LabeledError",
    "RankingModel", "TrainingSet", "build_training_set", "cross_validate", "predict", "rank",
    "train", "NoiseSpec", "make_vocabulary", "markov_corpus", "restore", "synth_corrupt",
    "FilterConfig", "Token", "TokenizerRules", "apply_filters", "detokenize", "tokenize",
]
