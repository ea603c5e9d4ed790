"""Run configuration: one JSON file, overridable per command.

Schema (every key optional; relative paths resolve against the config
file's directory)::

    {
      "unigram_files": ["1gms.txt"],        # Web-1T style unigram counts
      "ngram_files": ["5gms.txt"],          # counts of order window_order
      "cache_dir": "cache",                 # binary index caches (optional)
      "lexicon": "words.txt",               # main lexicon; default: unigrams
      "lexicon_min_count": 1,               #   seen at least this often
      "existence_lexicons": [{"name": "taxa", "path": "taxa.txt"}],
      "common_words": "common.txt",         # words never flagged
      "filters": {"punctuation": true, "numeric": true, "casefold": true},
      "tokenizer": {"split_hyphens": true, "hyphens": "-",
                    "group_repeated_punctuation": true},
      "window_order": 5,
      "unigram_thresholds": {"1": 1000000, "2": 100000, "3": 10000,
                             "4": 1000, "7": 200},
      "context_threshold": 1,
      "delta": 3,
      "search_method": "trie",              # or "scan"
      "casefold_search": false,
      "search_existence_lexicons": true,
      "alphas": [0.25, 0.25, 0.25, 0.25],
      "similarity_normalization": "sum-of-lengths",  # or "product-of-lengths"
      "disabled_features": [],
      "top_k": 10,
      "ranker": {"n_stages": 50, "max_depth": 3, "min_samples_leaf": 2},
      "cv_folds": 0,                        # 0 disables grid search
      "cv_grid": {"n_stages": [25, 50, 100], "max_depth": [2, 3, 4]},
      "train_fraction": 0.8,
      "model": "model.json",
      "seed": 0
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .detection import DEFAULT_UNIGRAM_THRESHOLDS
from .errors import ConfigError
from .features import SUM_OF_LENGTHS, DEFAULT_ALPHAS, PRODUCT_OF_LENGTHS
from .ranking import DEFAULT_GRID

_PATH_KEYS = ("lexicon", "common_words", "model", "cache_dir")
_PATH_LIST_KEYS = ("unigram_files", "ngram_files")


@dataclass(frozen=True)
class Config:
    unigram_files: tuple = ()
    ngram_files: tuple = ()
    cache_dir: Optional[str] = None
    lexicon: Optional[str] = None
    lexicon_min_count: int = 1
    existence_lexicons: tuple = ()
    common_words: Optional[str] = None
    filters: dict = field(default_factory=dict)
    tokenizer: dict = field(default_factory=dict)
    window_order: int = 5
    unigram_thresholds: dict = field(default_factory=lambda: dict(DEFAULT_UNIGRAM_THRESHOLDS))
    context_threshold: int = 1
    delta: int = 3
    search_method: str = "trie"
    casefold_search: bool = False
    search_existence_lexicons: bool = True
    alphas: tuple = DEFAULT_ALPHAS
    similarity_normalization: str = SUM_OF_LENGTHS
    disabled_features: tuple = ()
    top_k: int = 10
    ranker: dict = field(default_factory=dict)
    cv_folds: int = 0
    cv_grid: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_GRID.items()})
    train_fraction: float = 0.8
    model: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        for name in ("unigram_files", "ngram_files", "alphas", "disabled_features"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "unigram_thresholds",
                           {int(k): int(v) for k, v in self.unigram_thresholds.items()})
        lexes = []
        for entry in self.existence_lexicons:
            if isinstance(entry, str):
                entry = {"path": entry}
            if "path" not in entry:
                raise ConfigError(f"existence lexicon entry without a path: {entry!r}")
            lexes.append(dict(entry))
        object.__setattr__(self, "existence_lexicons", tuple(lexes))
        self._validate()

    def _validate(self):
        if self.delta < 0:
            raise ConfigError(f"delta must be >= 0, got {self.delta}")
        context_on = not {"exact_context", "relaxed_context"} <= set(self.disabled_features)
        if self.window_order < 2 and context_on:
            raise ConfigError(f"window_order must be >= 2 for context features, got {self.window_order}")
        if self.search_method not in ("trie", "scan"):
            raise ConfigError(f"search_method must be 'trie' or 'scan', got {self.search_method!r}")
        if self.similarity_normalization not in (SUM_OF_LENGTHS, PRODUCT_OF_LENGTHS):
            raise ConfigError(f"unknown similarity_normalization {self.similarity_normalization!r}")
        if len(self.alphas) != 4:
            raise ConfigError("alphas needs exactly four weights")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.cv_folds == 1 or self.cv_folds < 0:
            raise ConfigError("cv_folds must be 0 (off) or >= 2")
        unknown = set(self.ranker) - {"n_stages", "max_depth", "min_samples_leaf"}
        if unknown:
            raise ConfigError(f"unknown ranker setting(s): {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data, base_dir=None):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        data = dict(data)
        if base_dir is not None:
            base = Path(base_dir)
            for k in _PATH_KEYS:
                if data.get(k) is not None:
                    data[k] = str(base / data[k])
            for k in _PATH_LIST_KEYS:
                if k in data:
                    data[k] = [str(base / p) for p in data[k]]
            if "existence_lexicons" in data:
                data["existence_lexicons"] = [
                    {**e, "path": str(base / e["path"])} if isinstance(e, dict) and "path" in e
                    else str(base / e) if isinstance(e, str) else e
                    for e in data["existence_lexicons"]]
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data, base_dir=path.parent)

    def override(self, **values) -> "Config":
        """Copy with the given keys replaced; ``None`` values are ignored."""
        values = {k: v for k, v in values.items() if v is not None}
        try:
            return replace(self, **values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def check_files(self, need_indexes=True) -> None:
        """Raise :class:`ConfigError` for any referenced input file that is missing."""
        paths = []
        if need_indexes:
            if not self.unigram_files:
                raise ConfigError("no unigram_files configured")
            if not self.ngram_files:
                raise ConfigError("no ngram_files configured")
            paths += list(self.unigram_files) + list(self.ngram_files)
        for k in ("lexicon", "common_words"):
            if getattr(self, k):
                paths.append(getattr(self, k))
        paths += [e["path"] for e in self.existence_lexicons]
        for p in paths:
            if not Path(p).is_file():
                raise ConfigError(f"file not found: {p}")

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out
