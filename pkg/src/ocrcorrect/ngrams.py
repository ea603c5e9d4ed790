"""N-gram frequency index with exact and one-wildcard lookup.

Count files use the Google Web 1T layout: tokens joined by a single
space, one TAB, a decimal count, newline.  ``.gz`` files are read
transparently.
"""

from __future__ import annotations

import gzip
import hashlib
import logging
import os
import pickle
from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CountOverflowError, NgramParseError, SchemaError, UsageError

logger = logging.getLogger(__name__)

MAX_COUNT = 2**64 - 1

CACHE_MAGIC = b"OCRNGIDX"
CACHE_VERSION = 1


def _checked_add(a, b):
    total = a + b
    if total > MAX_COUNT:
        raise CountOverflowError(f"n-gram count exceeds 64-bit range: {total}")
    return total


class NgramIndex:
    """Immutable count table for n-grams of a single order.

    Besides the exact table, one aggregated table per position holds the
    sum of counts of all n-grams that agree everywhere except at that
    position, so a wildcard query is a single dictionary lookup.
    """

    def __init__(self, order, counts):
        if order < 1:
            raise UsageError(f"order must be >= 1, got {order}")
        self.order = order
        self._exact = dict(counts)
        self._masked = [{} for _ in range(order)]
        vocab = set()
        for gram, c in self._exact.items():
            vocab.update(gram)
            for p, table in enumerate(self._masked):
                key = gram[:p] + gram[p + 1:]
                table[key] = _checked_add(table.get(key, 0), c)
        self.vocab_size = len(vocab)

    @classmethod
    def from_counts(cls, counts: Mapping, order: int):
        merged = {}
        for gram, c in counts.items():
            gram = tuple(gram)
            if len(gram) != order:
                raise SchemaError(f"{len(gram)}-gram {gram!r} in an order-{order} index")
            if c < 0:
                raise SchemaError(f"negative count for {gram!r}")
            merged[gram] = _checked_add(merged.get(gram, 0), int(c))
        return cls(order, merged)

    def __len__(self):
        return len(self._exact)

    def __contains__(self, gram):
        return tuple(gram) in self._exact

    def items(self):
        return self._exact.items()

    def _check(self, gram):
        gram = tuple(gram)
        if len(gram) != self.order:
            raise UsageError(f"expected a {self.order}-gram, got {len(gram)} tokens: {gram!r}")
        return gram

    def freq(self, gram: Sequence[str]) -> int:
        """Exact count; 0 for an n-gram never seen."""
        return self._exact.get(self._check(gram), 0)

    def relaxed_freq(self, gram: Sequence[str], wild_position: int) -> int:
        """Sum of counts over all n-grams equal to ``gram`` except at
        ``wild_position``, where any token matches (the original included)."""
        gram = self._check(gram)
        if not 0 <= wild_position < self.order:
            raise UsageError(f"wild_position {wild_position} outside 0..{self.order - 1}")
        key = gram[:wild_position] + gram[wild_position + 1:]
        return self._masked[wild_position].get(key, 0)

    def scaled(self, factor: int) -> "NgramIndex":
        """A copy with every count multiplied by ``factor``."""
        return NgramIndex(self.order, {g: c * factor for g, c in self._exact.items()})


def _open_text(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8", newline="\n")
    return path.open(encoding="utf-8", newline="\n")


def parse_ngram_line(line, path="<string>", lineno=0):
    """Parse ``tok1 tok2 ... tokN<TAB>count`` into (tuple, int)."""
    line = line.rstrip("\n")
    if line.endswith("\r"):
        line = line[:-1]
    gram, sep, count = line.rpartition("\t")
    if not sep or not gram:
        raise NgramParseError(path, lineno, f"expected '<tokens>\\t<count>', got {line!r}")
    if not count.isascii() or not count.isdigit():
        raise NgramParseError(path, lineno, f"count is not a non-negative integer: {count!r}")
    tokens = tuple(gram.split(" "))
    if any(t == "" for t in tokens):
        raise NgramParseError(path, lineno, f"empty token in {gram!r}")
    return tokens, int(count)


def build_index(ngram_files: Iterable, order: int) -> NgramIndex:
    """Read Web-1T style count files into an :class:`NgramIndex`.

    Duplicate n-grams across lines or files have their counts summed.
    """
    counts = {}
    for path in ngram_files:
        with _open_text(path) as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                gram, c = parse_ngram_line(line, path, lineno)
                if len(gram) != order:
                    raise SchemaError(
                        f"{path}:{lineno}: {len(gram)}-gram in an order-{order} build")
                counts[gram] = _checked_add(counts.get(gram, 0), c)
    logger.info("built order-%d index with %d n-grams", order, len(counts))
    return NgramIndex(order, counts)


def count_ngrams(sequences: Iterable[Sequence[str]], order: int) -> Counter:
    """Count every contiguous n-gram of the given order in each sequence."""
    counts = Counter()
    for seq in sequences:
        seq = list(seq)
        for i in range(len(seq) - order + 1):
            counts[tuple(seq[i:i + order])] += 1
    return counts


def write_ngram_file(counts: Mapping, path) -> None:
    """Write counts in the Web-1T layout, sorted for reproducible output."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for gram in sorted(counts):
            fh.write(f"{' '.join(gram)}\t{counts[gram]}\n")


def _fingerprint(paths, order):
    h = hashlib.sha256(f"order={order}".encode())
    for p in paths:
        st = os.stat(p)
        h.update(f"|{os.path.abspath(p)}:{st.st_size}:{st.st_mtime_ns}".encode())
    return h.hexdigest().encode()


def save_cache(index: NgramIndex, path, fingerprint: bytes = b"") -> None:
    header = CACHE_MAGIC + bytes([CACHE_VERSION]) + len(fingerprint).to_bytes(2, "big") + fingerprint
    payload = pickle.dumps((index.order, index._exact), protocol=pickle.HIGHEST_PROTOCOL)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_cache(path, fingerprint: bytes = None):
    """Load a cached index, or return None if the cache is absent or stale."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        return None
    n = len(CACHE_MAGIC)
    if data[:n] != CACHE_MAGIC or len(data) < n + 3 or data[n] != CACHE_VERSION:
        logger.warning("ignoring index cache %s: bad magic or version", path)
        return None
    flen = int.from_bytes(data[n + 1:n + 3], "big")
    stored = data[n + 3:n + 3 + flen]
    if fingerprint is not None and stored != fingerprint:
        logger.info("index cache %s is stale, rebuilding", path)
        return None
    order, exact = pickle.loads(data[n + 3 + flen:])
    return NgramIndex(order, exact)


def load_or_build(ngram_files: Sequence, order: int, cache_path=None) -> NgramIndex:
    """Use ``cache_path`` when it matches the inputs, else build and write it."""
    files = [str(p) for p in ngram_files]
    if cache_path is None:
        return build_index(files, order)
    fp = _fingerprint(files, order)
    index = load_cache(cache_path, fp)
    if index is None:
        index = build_index(files, order)
        save_cache(index, cache_path, fp)
    return index
