"""Tokenization and token filtering for OCR text.

The tokenizer follows Penn Treebank conventions loosely, with the rule set
kept as data (:class:`TokenizerRules`) so it can be audited and swapped:

1. split on whitespace;
2. detach leading and trailing punctuation runs from each chunk
   (one token per character, or per run of a repeated character);
3. keep every internal character, including apostrophes, attached;
4. split the remaining core at internal hyphens into child tokens that
   point back at the unsplit parent through ``Token.origin``.

Offsets are code-point offsets into the decoded ``str``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import ConfigError

WORD = "word"
PUNCTUATION = "punctuation"
NUMERIC = "numeric"

_DIGITS = frozenset("0123456789")
_CHUNK_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int
    kind: str = WORD
    filtered: bool = False
    origin: Optional["Token"] = field(default=None, compare=False, repr=False)
    space_before: str = field(default="", compare=False, repr=False)
    space_after: str = field(default="", compare=False, repr=False)

    @property
    def span(self):
        return (self.start, self.end)

    @property
    def is_word(self):
        return self.kind == WORD

    def __len__(self):
        return len(self.surface)


@dataclass(frozen=True)
class TokenizerRules:
    split_hyphens: bool = True
    hyphens: str = "-‐"
    group_repeated_punctuation: bool = True

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"split_hyphens", "hyphens", "group_repeated_punctuation"}
        if unknown:
            raise ConfigError(f"unknown tokenizer rule(s): {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class FilterConfig:
    """Which token classes are excluded from error detection.

    ``common_words`` is compared case-insensitively when ``casefold`` is set.
    """

    common_words: frozenset = frozenset()
    punctuation: bool = True
    numeric: bool = True
    casefold: bool = True

    @classmethod
    def from_file(cls, path, **kwargs):
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"common-word lexicon not found: {path}")
        words = set()
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                term = line.rstrip("\n").split("\t", 1)[0].strip()
                if term:
                    words.add(term)
        casefold = kwargs.get("casefold", True)
        if casefold:
            words = {w.casefold() for w in words}
        return cls(common_words=frozenset(words), **kwargs)


def is_punctuation_char(ch):
    return not ch.isalnum()


def classify(surface):
    if surface and all(c in _DIGITS for c in surface):
        return NUMERIC
    if not any(c.isalnum() for c in surface):
        return PUNCTUATION
    return WORD


def _punct_runs(text, start, end, group):
    """Split text[start:end] (all punctuation) into token spans."""
    spans = []
    i = start
    while i < end:
        j = i + 1
        if group:
            while j < end and text[j] == text[i]:
                j += 1
        spans.append((i, j))
        i = j
    return spans


def tokenize(text: Union[str, bytes], rules: Optional[TokenizerRules] = None) -> list:
    """Tokenize ``text`` into a list of :class:`Token`.

    ``bytes`` input is decoded as strict UTF-8; a decode failure raises
    :class:`UnicodeDecodeError`, whose ``start`` attribute is the offending
    byte offset.
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8")
    rules = rules or TokenizerRules()
    hyphens = set(rules.hyphens) if rules.split_hyphens else set()

    tokens = []
    prev_end = 0

    def emit(tok):
        nonlocal prev_end
        tokens.append(tok)
        prev_end = tok.end

    for m in _CHUNK_RE.finditer(text):
        a, b = m.span()
        i = a
        while i < b and is_punctuation_char(text[i]):
            i += 1
        j = b
        while j > i and is_punctuation_char(text[j - 1]):
            j -= 1

        for s, e in _punct_runs(text, a, i, rules.group_repeated_punctuation):
            emit(Token(text[s:e], s, e, PUNCTUATION, space_before=text[prev_end:s]))

        if i < j:
            core = text[i:j]
            space = text[prev_end:i]
            parent = Token(core, i, j, classify(core), space_before=space)
            pieces = []
            if hyphens and any(c in hyphens for c in core):
                k = i
                for pos in range(i, j + 1):
                    if pos == j or text[pos] in hyphens:
                        if pos > k:
                            pieces.append((k, pos))
                        k = pos + 1
            if len(pieces) > 1:
                for n, (s, e) in enumerate(pieces):
                    piece = text[s:e]
                    emit(Token(piece, s, e, classify(piece), origin=parent,
                               space_before=space if n == 0 else ""))
                # the hyphens themselves are covered by the parent span
                prev_end = j
            else:
                emit(parent)

        for s, e in _punct_runs(text, j, b, rules.group_repeated_punctuation):
            emit(Token(text[s:e], s, e, PUNCTUATION, space_before=text[prev_end:s]))

    if tokens:
        tokens[-1] = replace(tokens[-1], space_after=text[prev_end:])
    return tokens


def detokenize(tokens: Sequence[Token]) -> str:
    """Rebuild source text from tokens and their recorded whitespace.

    Hyphen-split children are replaced by their parent's surface.  A text
    without tokens has nowhere to keep its whitespace and rebuilds as "".
    """
    parts = []
    last_parent = None
    for tok in tokens:
        if tok.origin is not None:
            if tok.origin is last_parent:
                continue
            last_parent = tok.origin
            parts.append(tok.space_before)
            parts.append(tok.origin.surface)
        else:
            last_parent = None
            parts.append(tok.space_before)
            parts.append(tok.surface)
    if tokens:
        parts.append(tokens[-1].space_after)
    return "".join(parts)


def span_text(tokens: Sequence[Token]) -> str:
    """Source text from the first token's start to the last token's end."""
    if not tokens:
        return ""
    parts = [tokens[0].surface]
    for prev, tok in zip(tokens, tokens[1:]):
        if tok.origin is not None and tok.origin is prev.origin:
            base = tok.origin.start
            parts.append(tok.origin.surface[prev.end - base:tok.start - base])
        else:
            parts.append(tok.space_before)
        parts.append(tok.surface)
    return "".join(parts)


def covering_spans(tokens: Iterable[Token]) -> list:
    """Spans of top-level units: a parent span stands in for its children."""
    spans = []
    last_parent = None
    for tok in tokens:
        if tok.origin is not None:
            if tok.origin is last_parent:
                continue
            last_parent = tok.origin
            spans.append(tok.origin.span)
        else:
            last_parent = None
            spans.append(tok.span)
    return spans


def apply_filters(tokens: Sequence[Token], filters: FilterConfig) -> list:
    """Mark punctuation, numeric and common-word tokens as filtered.

    Tokens are never removed: filtered tokens stay in the stream and keep
    their original surface, so they still serve as context words for
    their neighbours.
    """
    out = []
    for tok in tokens:
        flag = tok.filtered
        if tok.kind == PUNCTUATION and filters.punctuation:
            flag = True
        elif tok.kind == NUMERIC and filters.numeric:
            flag = True
        elif tok.kind == WORD and filters.common_words:
            key = tok.surface.casefold() if filters.casefold else tok.surface
            flag = flag or key in filters.common_words
        out.append(tok if flag == tok.filtered else replace(tok, filtered=flag))
    return out
