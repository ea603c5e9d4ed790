"""Error detection from unigram and n-gram context frequencies."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import UsageError
from .ngrams import NgramIndex
from .text import WORD, Token

DEFAULT_UNIGRAM_THRESHOLDS = {1: 10**6, 2: 10**5, 3: 10**4, 4: 10**3, 7: 200}


class Context(NamedTuple):
    """An n-gram window of surfaces and the error's offset inside it."""

    gram: tuple
    offset: int

    def substitute(self, word):
        g = self.gram
        return g[:self.offset] + (word,) + g[self.offset + 1:]


@dataclass(frozen=True)
class DetectionThresholds:
    """Detection cut-offs.

    ``unigram_by_length`` maps a word length to the minimum unigram count a
    word must exceed.  Lengths between keys use the nearest smaller key;
    lengths below the smallest key use the smallest key.
    """

    unigram_by_length: dict = field(default_factory=lambda: dict(DEFAULT_UNIGRAM_THRESHOLDS))
    context_threshold: int = 1
    window_order: int = 5

    def __post_init__(self):
        if not self.unigram_by_length:
            raise UsageError("unigram_by_length must not be empty")
        if any(v < 0 for v in self.unigram_by_length.values()) or self.context_threshold < 0:
            raise UsageError("thresholds must be >= 0")
        if self.window_order < 1:
            raise UsageError("window_order must be >= 1")

    def unigram_threshold(self, length):
        keys = sorted(self.unigram_by_length)
        i = bisect.bisect_right(keys, length) - 1
        return self.unigram_by_length[keys[max(i, 0)]]

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "unigram_by_length" in data:
            data["unigram_by_length"] = {int(k): int(v) for k, v in data["unigram_by_length"].items()}
        return cls(**data)


@dataclass(frozen=True)
class DetectedError:
    token: Token
    position: int
    contexts: tuple
    unigram_freq: int
    best_context_freq: int

    @property
    def surface(self):
        return self.token.surface

    @property
    def span(self):
        return self.token.span


def collect_contexts(tokens: Sequence[Token], position: int, n: int) -> list:
    """Every length-``n`` window over ``tokens`` that contains ``position``.

    An interior token gets exactly ``n`` windows; fewer near either end of
    the text, and none if the text has fewer than ``n`` tokens.
    """
    if n < 1:
        raise UsageError(f"window size must be >= 1, got {n}")
    if not 0 <= position < len(tokens):
        raise UsageError(f"position {position} outside 0..{len(tokens) - 1}")
    surfaces = [t.surface for t in tokens]
    return _windows(surfaces, position, n)


def _windows(surfaces, position, n):
    lo = max(0, position - n + 1)
    hi = min(position, len(surfaces) - n)
    return [Context(tuple(surfaces[s:s + n]), position - s) for s in range(lo, hi + 1)]


def detect(tokens: Sequence[Token], index: NgramIndex, unigram_index: NgramIndex,
           thresholds: DetectionThresholds = DetectionThresholds()) -> list:
    """Flag word tokens that fail either frequency condition.

    A word passes when its unigram count is strictly greater than the
    length-dependent threshold and at least one of its context windows has
    a count of ``context_threshold`` or more.  Filtered and non-word tokens
    are never reported.
    """
    n = thresholds.window_order
    if index.order != n:
        raise UsageError(f"context index has order {index.order}, thresholds expect {n}")
    surfaces = [t.surface for t in tokens]
    found = []
    for i, tok in enumerate(tokens):
        if tok.filtered or tok.kind != WORD:
            continue
        f1 = unigram_index.freq((tok.surface,))
        contexts = _windows(surfaces, i, n)
        best = max((index.freq(c.gram) for c in contexts), default=0)
        if f1 <= thresholds.unigram_threshold(len(tok.surface)) or best < thresholds.context_threshold:
            found.append(DetectedError(tok, i, tuple(contexts), f1, best))
    return found
