"""Lexicons and bounded Levenshtein candidate search.

Distances are over Unicode code points with unit-cost insertion,
deletion and substitution (no transposition).

Two search routes return the same set:

* ``method="trie"`` walks a character trie one depth level at a time,
  computing the DP rows of every surviving node of that level in one
  numpy operation and pruning nodes whose row minimum exceeds delta;
* ``method="scan"`` runs the DP against every lexicon term at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import ConfigError, UsageError
from .text import WORD, classify


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions and
    substitutions turning ``a`` into ``b``."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


class _LevelTrie:
    """A trie stored as one set of parallel arrays per depth."""

    def __init__(self, keys):
        self.keys = keys
        children = [{}]
        term = [-1]
        for k, key in enumerate(keys):
            node = 0
            for ch in key:
                nxt = children[node].get(ch)
                if nxt is None:
                    nxt = len(children)
                    children[node][ch] = nxt
                    children.append({})
                    term.append(-1)
                node = nxt
            term[node] = k
        self.root_term = term[0]
        self.levels = []
        frontier = [0]
        while True:
            parents, chars, terms, nxt_frontier = [], [], [], []
            for pos, node in enumerate(frontier):
                for ch in sorted(children[node]):
                    child = children[node][ch]
                    parents.append(pos)
                    chars.append(ord(ch))
                    terms.append(term[child])
                    nxt_frontier.append(child)
            if not nxt_frontier:
                break
            self.levels.append((np.array(parents, dtype=np.int64),
                                np.array(chars, dtype=np.int64),
                                np.array(terms, dtype=np.int64)))
            frontier = nxt_frontier

    def search(self, query, delta):
        m = len(query)
        q = np.array([ord(c) for c in query], dtype=np.int64)
        hits = {}
        if self.root_term >= 0 and m <= delta:
            hits[self.keys[self.root_term]] = m
        rows = np.arange(m + 1, dtype=np.int64)[None, :]
        row_of = np.zeros(1, dtype=np.int64)
        for depth, (parents, chars, terms) in enumerate(self.levels, 1):
            if depth > m + delta:
                break
            r = row_of[parents]
            keep = np.flatnonzero(r >= 0)
            if keep.size == 0:
                break
            prev = rows[r[keep]]
            cur = np.empty((keep.size, m + 1), dtype=np.int64)
            cur[:, 0] = depth
            if m:
                mismatch = chars[keep][:, None] != q[None, :]
                np.minimum(prev[:, :-1] + mismatch, prev[:, 1:] + 1, out=cur[:, 1:])
                for j in range(1, m + 1):
                    np.minimum(cur[:, j], cur[:, j - 1] + 1, out=cur[:, j])
            t = terms[keep]
            for idx in np.flatnonzero((t >= 0) & (cur[:, m] <= delta)):
                hits[self.keys[t[idx]]] = int(cur[idx, m])
            alive = cur.min(axis=1) <= delta
            row_of = np.full(parents.size, -1, dtype=np.int64)
            row_of[keep[alive]] = np.arange(int(alive.sum()))
            rows = cur[alive]
        return hits


class _ScanTable:
    """Lexicon keys as a padded code-point matrix for whole-lexicon DP."""

    def __init__(self, keys):
        self.keys = list(keys)
        self.lengths = np.array([len(k) for k in self.keys], dtype=np.int64)
        width = int(self.lengths.max()) if self.keys else 0
        self.mat = np.full((len(self.keys), max(width, 1)), -1, dtype=np.int64)
        for i, k in enumerate(self.keys):
            self.mat[i, :len(k)] = [ord(c) for c in k]
        self.width = width
        self.mat_t = np.ascontiguousarray(self.mat.T)

    def distances(self, query):
        n, m = len(self.keys), len(query)
        out = np.full(n, m, dtype=np.int64)
        if n == 0:
            return out
        q = np.array([ord(c) for c in query], dtype=np.int64)
        # DP columns stored query-major so each step touches contiguous memory
        prev = np.repeat(np.arange(m + 1, dtype=np.int32)[:, None], n, axis=1)
        cur = np.empty_like(prev)
        for i in range(1, self.width + 1):
            cur[0] = i
            if m:
                mismatch = (self.mat_t[i - 1][None, :] != q[:, None]).astype(np.int32)
                np.add(prev[:-1], mismatch, out=cur[1:])
                np.minimum(cur[1:], prev[1:] + 1, out=cur[1:])
                for j in range(1, m + 1):
                    np.minimum(cur[j], cur[j - 1] + 1, out=cur[j])
            done = self.lengths == i
            out[done] = cur[m, done]
            prev, cur = cur, prev
        return out


def scan_distances(query: str, keys) -> np.ndarray:
    """Levenshtein distance from ``query`` to every key, vectorized over keys."""
    return _ScanTable(keys).distances(query)


@dataclass
class Lexicon:
    """A named set of terms, optionally with frequencies."""

    terms: frozenset
    name: str = "lexicon"
    frequencies: Optional[Mapping] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.terms = frozenset(self.terms)
        if self.frequencies is not None and any(f < 1 for f in self.frequencies.values()):
            raise ConfigError(f"lexicon {self.name!r}: frequencies must be >= 1")

    def __contains__(self, term):
        return term in self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms))

    @classmethod
    def from_file(cls, path, name=None):
        """Read one term per line, optionally followed by TAB and a count."""
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"lexicon file not found: {path}")
        terms, freqs = set(), {}
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                term, sep, count = line.partition("\t")
                terms.add(term)
                if sep:
                    if not count.strip().isdigit():
                        raise ConfigError(f"{path}:{lineno}: bad frequency {count!r}")
                    freqs[term] = freqs.get(term, 0) + int(count)
        return cls(frozenset(terms), name or path.stem, freqs or None)

    @classmethod
    def from_unigrams(cls, unigram_index, min_count=1, name="english", words_only=True):
        """Every unigram seen at least ``min_count`` times.

        With ``words_only`` pure punctuation and pure digit strings are left out.
        """
        if unigram_index.order != 1:
            raise UsageError("lexicon construction needs an order-1 index")
        freqs = {g[0]: c for g, c in unigram_index.items()
                 if c >= min_count and (not words_only or classify(g[0]) == WORD)}
        return cls(frozenset(freqs), name, freqs)

    def _folded(self):
        if "folded" not in self._cache:
            groups = {}
            for t in sorted(self.terms):
                groups.setdefault(t.casefold(), []).append(t)
            self._cache["folded"] = groups
        return self._cache["folded"]

    def _keys(self, casefold):
        return sorted(self._folded()) if casefold else sorted(self.terms)

    def trie(self, casefold=False):
        key = ("trie", casefold)
        if key not in self._cache:
            self._cache[key] = _LevelTrie(self._keys(casefold))
        return self._cache[key]

    def scan_table(self, casefold=False):
        key = ("scan", casefold)
        if key not in self._cache:
            self._cache[key] = _ScanTable(self._keys(casefold))
        return self._cache[key]


@dataclass(frozen=True)
class CandidateSet:
    """Lexicon terms within ``delta`` edits of ``query``, with distances.

    Iteration order is by (distance, term).
    """

    query: str
    delta: int
    distances: Mapping

    def __iter__(self):
        return iter(self.distances)

    def __len__(self):
        return len(self.distances)

    def __contains__(self, term):
        return term in self.distances

    @property
    def terms(self):
        return list(self.distances)


def _ordered(query, delta, hits):
    return CandidateSet(query, delta, dict(sorted(hits.items(), key=lambda kv: (kv[1], kv[0]))))


def search(error_surface: str, lexicon: Lexicon, delta: int = 3,
           casefold: bool = False, method: str = "trie") -> CandidateSet:
    """All lexicon terms ``w`` with ``levenshtein(w, error_surface) <= delta``.

    With ``casefold`` the comparison is between case-folded forms and
    every original spelling sharing a matching folded form is returned.
    """
    if delta < 0:
        raise UsageError(f"delta must be >= 0, got {delta}")
    if not lexicon.terms:
        raise ConfigError(f"lexicon {lexicon.name!r} is empty")
    query = error_surface.casefold() if casefold else error_surface
    if method == "trie":
        hits = lexicon.trie(casefold).search(query, delta)
    elif method == "scan":
        table = lexicon.scan_table(casefold)
        dist = table.distances(query)
        hits = {table.keys[i]: int(dist[i]) for i in np.flatnonzero(dist <= delta)}
    else:
        raise UsageError(f"unknown search method {method!r}")
    if casefold:
        groups = lexicon._folded()
        hits = {orig: d for key, d in hits.items() for orig in groups[key]}
    return _ordered(error_surface, delta, hits)


def search_lexicons(error_surface: str, lexicons: Iterable[Lexicon], delta: int = 3,
                    casefold: bool = False, method: str = "trie") -> CandidateSet:
    """Union of :func:`search` over several lexicons (empty ones skipped)."""
    hits = {}
    for lex in lexicons:
        if lex.terms:
            hits.update(search(error_surface, lex, delta, casefold, method).distances)
    return _ordered(error_surface, delta, hits)
