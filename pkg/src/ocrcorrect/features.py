"""Per-candidate feature scores.

Six feature families are computed for every candidate of a detected
error, in a fixed order:

``edit_distance``, ``string_similarity``, ``language_popularity``,
one ``lexicon:<name>`` slot per existence lexicon, ``exact_context`` and
``relaxed_context``.

The three popularity features are normalized by their maximum over the
candidate set; when that maximum is 0 every candidate scores 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .candidates import CandidateSet, Lexicon, levenshtein, search_lexicons
from .errors import ScoringError, UsageError
from .ngrams import NgramIndex

SUM_OF_LENGTHS = "sum-of-lengths"
PRODUCT_OF_LENGTHS = "product-of-lengths"
DEFAULT_ALPHAS = (0.25, 0.25, 0.25, 0.25)


def edit_distance_score(candidate: str, error: str, delta: int, dist: Optional[int] = None) -> float:
    if dist is None:
        dist = levenshtein(candidate, error)
    return 1.0 - dist / (delta + 1)


def lcs_length(a: str, b: str) -> int:
    """Length of the longest common (not necessarily contiguous) subsequence."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if ca == cb else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def common_prefix_length(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def common_suffix_length(a: str, b: str) -> int:
    return common_prefix_length(a[::-1], b[::-1])


def longest_common_substring_length(a: str, b: str) -> int:
    best = 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, 1):
            v = prev[j - 1] + 1 if ca == cb else 0
            cur.append(v)
            if v > best:
                best = v
        prev = cur
    return best


def _normalized(length, a, b, normalization):
    if normalization == SUM_OF_LENGTHS:
        return 2.0 * length * length / (len(a) + len(b))
    if normalization == PRODUCT_OF_LENGTHS:
        return length * length / (len(a) * len(b))
    raise UsageError(f"unknown similarity normalization {normalization!r}")


def similarity_components(candidate: str, error: str, normalization: str = SUM_OF_LENGTHS):
    """(nlcs, prefix, substring, suffix) normalized LCS variants."""
    if not candidate or not error:
        raise ScoringError("string similarity is undefined for empty strings")
    lengths = (
        lcs_length(candidate, error),
        common_prefix_length(candidate, error),
        longest_common_substring_length(candidate, error),
        common_suffix_length(candidate, error),
    )
    return tuple(_normalized(n, candidate, error, normalization) for n in lengths)


def string_similarity_score(candidate: str, error: str, alphas: Sequence[float] = DEFAULT_ALPHAS,
                            normalization: str = SUM_OF_LENGTHS) -> float:
    """Weighted sum of the four normalized LCS variants.

    With the default normalization, ``2 * len**2 / (len(a) + len(b))``,
    values can exceed 1 (identical length-4 strings give 4.0 per term).
    """
    if len(alphas) != 4:
        raise UsageError("string similarity needs exactly four weights")
    comps = similarity_components(candidate, error, normalization)
    return sum(w * c for w, c in zip(alphas, comps))


def _self_normalize(values):
    top = max(values, default=0)
    if top <= 0:
        return [0.0] * len(values)
    return [v / top for v in values]


def language_popularity(candidates: Sequence[str], unigrams: NgramIndex) -> list:
    return _self_normalize([unigrams.freq((c,)) for c in candidates])


def lexicon_existence(candidate: str, lexicon: Lexicon) -> int:
    return 1 if candidate in lexicon else 0


def exact_context_counts(candidates: Sequence[str], contexts, index: NgramIndex) -> list:
    return [sum(index.freq(ctx.substitute(c)) for ctx in contexts) for c in candidates]


def relaxed_context_counts(candidates: Sequence[str], contexts, index: NgramIndex) -> list:
    """Per candidate, sum over windows and over every non-candidate position
    of the one-wildcard count."""
    out = []
    for c in candidates:
        total = 0
        for ctx in contexts:
            gram = ctx.substitute(c)
            for p in range(len(gram)):
                if p != ctx.offset:
                    total += index.relaxed_freq(gram, p)
        out.append(total)
    return out


def exact_context_score(candidates: Sequence[str], contexts, index: NgramIndex) -> list:
    return _self_normalize(exact_context_counts(candidates, contexts, index))


def relaxed_context_score(candidates: Sequence[str], contexts, index: NgramIndex) -> list:
    return _self_normalize(relaxed_context_counts(candidates, contexts, index))


@dataclass(frozen=True)
class FeatureVector:
    names: tuple
    values: tuple

    def __getitem__(self, name):
        return self.values[self.names.index(name)]

    def as_array(self):
        return np.asarray(self.values, dtype=np.float64)


@dataclass
class Candidate:
    surface: str
    features: FeatureVector
    distance: int
    label: Optional[int] = None
    confidence: Optional[float] = None
    source_error: object = field(default=None, repr=False, compare=False)


@dataclass
class ScoringResources:
    """Everything the scorers read: indexes, lexicons and parameters."""

    unigrams: NgramIndex
    contexts: NgramIndex
    lexicon: Lexicon
    existence_lexicons: tuple = ()
    delta: int = 3
    alphas: tuple = DEFAULT_ALPHAS
    similarity_normalization: str = SUM_OF_LENGTHS
    casefold: bool = False
    search_method: str = "trie"
    search_existence_lexicons: bool = True
    disabled_features: tuple = ()

    def __post_init__(self):
        if self.unigrams.order != 1:
            raise UsageError("unigram index must have order 1")
        if self.delta < 0:
            raise UsageError("delta must be >= 0")
        self.existence_lexicons = tuple(self.existence_lexicons)
        names = [lex.name for lex in self.existence_lexicons]
        if len(set(names)) != len(names):
            raise UsageError(f"existence lexicon names must be unique: {names}")
        self.disabled_features = tuple(self.disabled_features)
        unknown = set(self.disabled_features) - set(self.all_feature_names)
        if unknown:
            raise UsageError(f"cannot disable unknown features {sorted(unknown)}")
        if len(self.feature_names) == 0:
            raise UsageError("every feature is disabled")

    @property
    def all_feature_names(self):
        return (("edit_distance", "string_similarity", "language_popularity")
                + tuple(f"lexicon:{lex.name}" for lex in self.existence_lexicons)
                + ("exact_context", "relaxed_context"))

    @property
    def feature_names(self):
        """Names of the enabled features, in vector order."""
        return tuple(n for n in self.all_feature_names if n not in self.disabled_features)


def candidates_for(surface: str, resources: ScoringResources) -> CandidateSet:
    """Search the main lexicon and, if enabled, the existence lexicons."""
    lexicons = [resources.lexicon]
    if resources.search_existence_lexicons:
        lexicons.extend(resources.existence_lexicons)
    return search_lexicons(surface, lexicons, resources.delta,
                           resources.casefold, resources.search_method)


def score_matrix(error, candidates: CandidateSet, resources: ScoringResources) -> np.ndarray:
    """Feature matrix with one row per candidate, in candidate-set order."""
    terms = candidates.terms
    surface = error.surface
    contexts = error.contexts
    cols = [
        [edit_distance_score(c, surface, resources.delta, candidates.distances[c]) for c in terms],
        [string_similarity_score(c, surface, resources.alphas, resources.similarity_normalization)
         for c in terms],
        language_popularity(terms, resources.unigrams),
    ]
    for lex in resources.existence_lexicons:
        cols.append([lexicon_existence(c, lex) for c in terms])
    cols.append(exact_context_score(terms, contexts, resources.contexts))
    cols.append(relaxed_context_score(terms, contexts, resources.contexts))
    off = set(resources.disabled_features)
    cols = [c for name, c in zip(resources.all_feature_names, cols) if name not in off]
    return np.array(cols, dtype=np.float64).T.reshape(len(terms), len(cols))


def score_all(error, candidates: CandidateSet, resources: ScoringResources) -> list:
    """One :class:`Candidate` with its :class:`FeatureVector` per term."""
    names = resources.feature_names
    mat = score_matrix(error, candidates, resources)
    return [Candidate(term, FeatureVector(names, tuple(float(v) for v in row)),
                      candidates.distances[term], source_error=error)
            for term, row in zip(candidates.terms, mat)]


def feature_top_k(terms: Sequence[str], matrix: np.ndarray, k: int = 10) -> list:
    """Per feature, the set of its ``k`` best candidates (same tie rule)."""
    order_by_surface = sorted(range(len(terms)), key=lambda i: terms[i])
    out = []
    for col in range(matrix.shape[1]):
        ranked = sorted(order_by_surface, key=lambda i: -matrix[i, col])
        out.append({terms[i] for i in ranked[:k]})
    return out


def top_k_pool(terms: Sequence[str], matrix: np.ndarray, k: int = 10) -> set:
    """Union over features of each feature's ``k`` best candidates."""
    return set().union(*feature_top_k(terms, matrix, k)) if len(terms) else set()
