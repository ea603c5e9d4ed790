import gzip
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ocrcorrect.errors import CountOverflowError, NgramParseError, SchemaError, UsageError
from ocrcorrect.ngrams import (MAX_COUNT, NgramIndex, build_index, count_ngrams, load_cache,
                               load_or_build, parse_ngram_line, save_cache, write_ngram_file)


def scan_relaxed(counts, gram, p):
    """Linear-scan oracle for one-wildcard lookups."""
    return sum(c for g, c in counts.items()
               if all(g[i] == gram[i] for i in range(len(gram)) if i != p))


def test_single_record(tmp_path):
    f = tmp_path / "5gms.txt"
    f.write_bytes(b"brightly coloured birds in which\t42\n")
    index = build_index([f], 5)
    assert index.freq(("brightly", "coloured", "birds", "in", "which")) == 42
    assert index.freq(("brightly", "coloured", "birds", "in", "that")) == 0


def test_duplicates_sum_across_lines_and_files(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("x y\t3\nx y\t4\n", encoding="utf-8")
    b.write_text("x y\t10\n", encoding="utf-8")
    assert build_index([a], 2).freq(("x", "y")) == 7
    assert build_index([a, b], 2).freq(("x", "y")) == 17


def test_order_mismatch_is_schema_error(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("a b c d e\t1\na b c d\t2\n", encoding="utf-8")
    with pytest.raises(SchemaError, match=r"bad.txt:2"):
        build_index([f], 5)


@pytest.mark.parametrize("line", ["a b c", "a b\tx", "a b\t-1", "a  b\t3", "\t3", "a b\t3.5"])
def test_malformed_lines(line):
    with pytest.raises(NgramParseError, match="f.txt:9"):
        parse_ngram_line(line, "f.txt", 9)


def test_parse_error_names_file_and_line(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("a\t1\nb 2\n", encoding="utf-8")
    with pytest.raises(NgramParseError) as info:
        build_index([f], 1)
    assert (info.value.lineno, info.value.path) == (2, str(f))


def test_gzip_input(tmp_path):
    f = tmp_path / "1gms.gz"
    with gzip.open(f, "wt", encoding="utf-8") as fh:
        fh.write("which\t9\nwhicli\t1\n")
    assert build_index([f], 1).freq(("which",)) == 9


def test_relaxed_small_example():
    index = NgramIndex.from_counts({("a", "b", "c"): 2, ("a", "x", "c"): 3, ("a", "b", "d"): 5}, 3)
    assert index.relaxed_freq(("a", "b", "c"), 1) == 5
    assert index.relaxed_freq(("a", "b", "c"), 2) == 7
    assert index.relaxed_freq(("q", "b", "c"), 1) == 0


def test_four_pattern_context_example():
    counts = {
        ("brightly", "coloured", "birds", "in", "which"): 40,
        ("vividly", "coloured", "birds", "in", "which"): 7,
        ("brightly", "painted", "birds", "in", "which"): 2,
        ("brightly", "coloured", "fish", "in", "which"): 5,
        ("brightly", "coloured", "birds", "of", "which"): 11,
        ("brightly", "coloured", "birds", "in", "that"): 13,
    }
    index = NgramIndex.from_counts(counts, 5)
    gram = ("brightly", "coloured", "birds", "in", "which")
    # mask each of the four context words; the candidate sits at position 4
    assert [index.relaxed_freq(gram, p) for p in range(4)] == [47, 42, 45, 51]


def test_usage_errors():
    index = NgramIndex.from_counts({("a", "b"): 1}, 2)
    with pytest.raises(UsageError):
        index.freq(("a",))
    with pytest.raises(UsageError):
        index.relaxed_freq(("a", "b"), 2)
    with pytest.raises(SchemaError):
        NgramIndex.from_counts({("a",): -1}, 1)


def test_count_overflow_is_checked():
    NgramIndex.from_counts({("a",): MAX_COUNT}, 1)
    with pytest.raises(CountOverflowError):
        NgramIndex.from_counts({("a",): MAX_COUNT}, 1).scaled(2)
    with pytest.raises(CountOverflowError):
        NgramIndex(2, {("a", "b"): MAX_COUNT, ("a", "c"): 1})


def test_file_layout_is_bit_exact(tmp_path):
    f = tmp_path / "2gms.txt"
    write_ngram_file({("b", "c"): 2, ("a", "é"): 10}, f)
    assert f.read_bytes() == "a é\t10\nb c\t2\n".encode("utf-8")


def test_count_ngrams():
    counts = count_ngrams([["a", "b", "a", "b"]], 2)
    assert counts == {("a", "b"): 2, ("b", "a"): 1}
    assert count_ngrams([["a"]], 2) == {}


def test_cache_round_trip_and_staleness(tmp_path):
    src = tmp_path / "2gms.txt"
    src.write_text("a b\t3\n", encoding="utf-8")
    cache = tmp_path / "idx.bin"
    first = load_or_build([src], 2, cache)
    assert cache.read_bytes()[:8] == b"OCRNGIDX"
    assert load_or_build([src], 2, cache).freq(("a", "b")) == first.freq(("a", "b")) == 3
    src.write_text("a b\t5\n", encoding="utf-8")
    assert load_or_build([src], 2, cache).freq(("a", "b")) == 5


def test_bad_or_missing_cache_triggers_rebuild(tmp_path):
    assert load_cache(tmp_path / "none.bin") is None
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"garbage")
    assert load_cache(junk) is None
    src = tmp_path / "1gms.txt"
    src.write_text("a\t1\n", encoding="utf-8")
    assert load_or_build([src], 1, junk).freq(("a",)) == 1


def test_save_and_load_cache_directly(tmp_path):
    index = NgramIndex.from_counts({("a", "b"): 3}, 2)
    save_cache(index, tmp_path / "c.bin", b"fp")
    assert load_cache(tmp_path / "c.bin", b"fp").freq(("a", "b")) == 3
    assert load_cache(tmp_path / "c.bin", b"other") is None


def test_build_is_order_independent(tmp_path):
    rng = np.random.default_rng(3)
    lines = [f"{' '.join(rng.choice(list('abc'), 3))}\t{int(rng.integers(0, 9))}\n" for _ in range(60)]
    f1, f2 = tmp_path / "1.txt", tmp_path / "2.txt"
    f1.write_text("".join(lines), encoding="utf-8")
    f2.write_text("".join(rng.permutation(lines)), encoding="utf-8")
    a, b = build_index([f1], 3), build_index([f2], 3)
    for gram in itertools.product("abcd", repeat=3):
        assert a.freq(gram) == b.freq(gram)
        assert all(a.relaxed_freq(gram, p) == b.relaxed_freq(gram, p) for p in range(3))


grams = st.tuples(*[st.sampled_from("abc")] * 3)


@given(st.dictionaries(grams, st.integers(0, 50), max_size=30), grams, st.integers(0, 2))
def test_relaxed_matches_scan_and_dominates_exact(counts, query, p):
    index = NgramIndex.from_counts(counts, 3)
    assert index.relaxed_freq(query, p) == scan_relaxed(counts, query, p)
    assert index.relaxed_freq(query, p) >= index.freq(query)
