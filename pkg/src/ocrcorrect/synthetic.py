"""Synthetic corpora and seeded OCR-style corruption with exact ground truth."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .candidates import levenshtein
from .errors import ConfigError
from .evaluation import GroundTruthError
from .text import WORD, tokenize


def make_vocabulary(size: int, seed: int = 0, min_len: int = 3, max_len: int = 9,
                    alphabet: str = string.ascii_lowercase, min_distance: int = 2) -> list:
    """``size`` distinct random words, pairwise at least ``min_distance`` edits apart.

    With ``min_distance >= 2`` a single-character substitution of one word
    never yields another.
    """
    rng = np.random.default_rng(seed)
    letters = list(alphabet)
    words = []
    by_length = {}
    attempts = 0
    while len(words) < size:
        attempts += 1
        if attempts > 200 * size + 1000:
            raise ConfigError(f"could not draw {size} words with min_distance={min_distance}")
        n = int(rng.integers(min_len, max_len + 1))
        w = "".join(rng.choice(letters, size=n))
        near = (v for L in range(n - min_distance + 1, n + min_distance)
                for v in by_length.get(L, ()))
        if any(levenshtein(w, v) < min_distance for v in near):
            continue
        words.append(w)
        by_length.setdefault(n, []).append(w)
    return words


def markov_corpus(vocabulary, n_tokens: int, seed: int = 0, successors: int = 6,
                  sentence_length: int = 12) -> str:
    """Text drawn from a sparse first-order Markov chain over ``vocabulary``.

    Each word has ``successors`` possible next words with Zipf-like
    probabilities; a period ends every ``sentence_length`` words on average
    (periods do not count toward ``n_tokens``).
    """
    rng = np.random.default_rng(seed)
    V = len(vocabulary)
    k = min(successors, V)
    nxt = np.array([rng.choice(V, size=k, replace=False) for _ in range(V)])
    probs = 1.0 / np.arange(1, k + 1)
    probs /= probs.sum()
    # unigram start distribution, also Zipf-like
    start_p = 1.0 / np.arange(1, V + 1)
    start_p /= start_p.sum()

    cur = int(rng.choice(V, p=start_p))
    choices = rng.choice(k, size=n_tokens, p=probs)
    stops = rng.random(n_tokens) < 1.0 / sentence_length
    out = []
    for i in range(n_tokens):
        out.append(vocabulary[cur])
        if stops[i]:
            out[-1] += "."
        cur = int(nxt[cur, choices[i]])
    return " ".join(out) + "\n"


@dataclass(frozen=True)
class NoiseSpec:
    """How to corrupt a clean text.

    ``confusions`` holds ``(source, target, probability)`` rules.  For every
    selected word each applicable rule is tried in turn (in a seeded random
    order) and applied with its probability; the first success wins.  A
    selected word becomes a split (a space inserted) with probability
    ``split_rate`` or a merge with the next word with ``merge_rate``
    instead.  ``word_rate`` is the fraction of eligible word tokens to
    corrupt.
    """

    confusions: tuple = ()
    word_rate: float = 0.02
    split_rate: float = 0.0
    merge_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "confusions", tuple(tuple(r) for r in self.confusions))
        for rule in self.confusions:
            if len(rule) != 3:
                raise ConfigError(f"confusion rule needs (source, target, probability): {rule!r}")
            src, dst, p = rule
            if not src or src == dst:
                raise ConfigError(f"confusion rule {src!r} -> {dst!r} changes nothing")
            _check_probability(p, f"rule {src!r} -> {dst!r}")
        for name in ("word_rate", "split_rate", "merge_rate"):
            _check_probability(getattr(self, name), name)
        if self.split_rate + self.merge_rate > 1:
            raise ConfigError("split_rate + merge_rate must not exceed 1")

    @classmethod
    def single_character(cls, alphabet: str = string.ascii_lowercase, word_rate: float = 0.02):
        """Every one-letter substitution within ``alphabet``, each with probability 1."""
        rules = tuple((a, b, 1.0) for a in alphabet for b in alphabet if a != b)
        return cls(rules, word_rate)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {"confusions", "word_rate", "split_rate", "merge_rate"}
        if unknown:
            raise ConfigError(f"unknown noise setting(s): {sorted(unknown)}")
        return cls(**data)


def _check_probability(p, what):
    if not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0:
        raise ConfigError(f"{what}: probability must lie in [0, 1], got {p!r}")


def _confuse(word, rules, rng, avoid):
    for r in rng.permutation(len(rules)):
        src, dst, p = rules[r]
        sites = [i for i in range(len(word) - len(src) + 1) if word.startswith(src, i)]
        if not sites or rng.random() >= p:
            continue
        i = sites[int(rng.integers(len(sites)))]
        out = word[:i] + dst + word[i + len(src):]
        if out in avoid:
            continue
        toks = tokenize(out)
        if len(toks) == 1 and toks[0].surface == out and toks[0].kind == WORD:
            return out
    return None


@dataclass
class Corruption:
    text: str
    errors: list = field(default_factory=list)


def synth_corrupt(clean_text: str, noise: NoiseSpec, seed: int = 0,
                  avoid: Optional[Iterable[str]] = None) -> Corruption:
    """Corrupt ``noise.word_rate`` of the word tokens of ``clean_text``.

    Only plain word tokens are touched (no hyphen-split pieces).  Words
    are picked in seeded random order until the target count is reached;
    a word no rule can change (or whose result is in ``avoid``) is
    skipped.  The returned errors carry offsets into the corrupted text,
    so replacing each ``observed`` span by ``intended`` restores the clean
    text exactly.
    """
    rng = np.random.default_rng(seed)
    avoid = frozenset(avoid or ())
    tokens = tokenize(clean_text)
    eligible = [i for i, t in enumerate(tokens) if t.kind == WORD and t.origin is None]
    target = int(round(noise.word_rate * len(eligible)))
    edits = {}  # clean token index -> (n_tokens consumed, new text)
    used = set()
    for i in rng.permutation(eligible):
        if len(edits) >= target:
            break
        i = int(i)
        if i in used:
            continue
        tok = tokens[i]
        u = rng.random()
        if u < noise.split_rate:
            if len(tok.surface) < 2:
                continue
            k = int(rng.integers(1, len(tok.surface)))
            new = tok.surface[:k] + " " + tok.surface[k:]
            if [t.surface for t in tokenize(new)] != [tok.surface[:k], tok.surface[k:]]:
                continue
            edits[i] = (1, new)
            used.add(i)
        elif u < noise.split_rate + noise.merge_rate:
            j = i + 1
            if j >= len(tokens) or j in used:
                continue
            nxt = tokens[j]
            if nxt.kind != WORD or nxt.origin is not None:
                continue
            if not nxt.space_before or "\n" in nxt.space_before:
                continue
            edits[i] = (2, tok.surface + nxt.surface)
            used.update((i, j))
        else:
            new = _confuse(tok.surface, noise.confusions, rng, avoid)
            if new is None:
                continue
            edits[i] = (1, new)
            used.add(i)

    # rebuild the corrupted text left to right, tracking offsets
    parts, errors = [], []
    pos_clean = 0
    out_len = 0
    for i in sorted(edits):
        n, new = edits[i]
        first, last = tokens[i], tokens[i + n - 1]
        keep = clean_text[pos_clean:first.start]
        parts.append(keep)
        out_len += len(keep)
        intended = clean_text[first.start:last.end]
        errors.append(GroundTruthError(intended, new, out_len, out_len + len(new),
                                       levenshtein(intended, new)))
        parts.append(new)
        out_len += len(new)
        pos_clean = last.end
    parts.append(clean_text[pos_clean:])
    return Corruption("".join(parts), errors)


def restore(corrupted: str, errors: Iterable[GroundTruthError]) -> str:
    """Undo recorded corruptions by writing each intended text back."""
    out = corrupted
    for e in sorted(errors, key=lambda e: e.start, reverse=True):
        out = out[:e.start] + e.intended + out[e.end:]
    return out
