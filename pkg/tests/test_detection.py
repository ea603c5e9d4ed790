import pytest
from hypothesis import given, strategies as st

from ocrcorrect.detection import DetectionThresholds, collect_contexts, detect
from ocrcorrect.errors import UsageError
from ocrcorrect.ngrams import NgramIndex
from ocrcorrect.text import FilterConfig, apply_filters, tokenize


def toks(text):
    return tokenize(text)


def test_interior_token_gets_n_windows():
    t = toks("brightly coloured birds in whicli the thrush sang here")
    ctx = collect_contexts(t, 4, 5)
    assert len(ctx) == 5
    assert all(len(c.gram) == 5 and c.gram[c.offset] == "whicli" for c in ctx)
    assert [c.offset for c in ctx] == [4, 3, 2, 1, 0]


def test_boundary_clipping():
    t = toks("a b c d e f g")
    assert len(collect_contexts(t, 0, 5)) == 1
    assert len(collect_contexts(t, 6, 5)) == 1
    assert len(collect_contexts(t, 3, 5)) == 3
    assert collect_contexts(toks("a b c"), 1, 5) == []


def test_collect_contexts_usage_errors():
    with pytest.raises(UsageError):
        collect_contexts(toks("a b"), 0, 0)
    with pytest.raises(UsageError):
        collect_contexts(toks("a b"), 2, 2)


def test_substitute():
    c = collect_contexts(toks("birds in whicli"), 2, 3)[0]
    assert c.substitute("which") == ("birds", "in", "which")


def test_threshold_lookup_uses_nearest_smaller_length():
    th = DetectionThresholds()
    assert [th.unigram_threshold(n) for n in (1, 2, 3, 4, 5, 6, 7, 12)] == \
        [10**6, 10**5, 10**4, 10**3, 10**3, 10**3, 200, 200]
    assert DetectionThresholds({3: 7}).unigram_threshold(1) == 7


def test_threshold_validation():
    with pytest.raises(UsageError):
        DetectionThresholds({1: -1})
    with pytest.raises(UsageError):
        DetectionThresholds({})


def _indexes():
    words = "a flock of brightly coloured birds in which the thrush sang loudly over the old hedge".split()
    uni = NgramIndex.from_counts({(w,): 5000 for w in words} | {("rare",): 300}, 1)
    five = NgramIndex.from_counts({tuple(words[i:i + 5]): 3 for i in range(len(words) - 4)}, 5)
    return uni, five


def test_nonword_detected_and_clean_words_pass():
    uni, five = _indexes()
    th = DetectionThresholds({1: 100}, 1, 5)
    found = detect(toks("a flock of brightly coloured birds in whicli the thrush sang loudly over the old hedge"),
                   five, uni, th)
    assert [e.surface for e in found] == ["whicli"]
    assert found[0].unigram_freq == 0
    assert found[0].position == 7
    assert len(found[0].contexts) == 5


def test_attested_word_passes_both_conditions():
    uni, five = _indexes()
    th = DetectionThresholds({1: 100}, 1, 5)
    assert detect(toks("a flock of brightly coloured birds in which the thrush sang loudly over the old hedge"),
                  five, uni, th) == []


def test_frequent_word_without_attested_context_is_detected():
    uni, five = _indexes()
    th = DetectionThresholds({1: 100}, 1, 5)
    found = detect(toks("sang thrush rare the in which coloured birds"), five, uni, th)
    assert "rare" in [e.surface for e in found]
    assert all(e.best_context_freq == 0 for e in found)


def test_unigram_comparison_is_strict():
    uni = NgramIndex.from_counts({("abc",): 100}, 1)
    five = NgramIndex.from_counts({("abc",) * 2: 1}, 2)
    text = toks("abc abc")
    assert len(detect(text, five, uni, DetectionThresholds({1: 100}, 1, 2))) == 2
    assert detect(text, five, uni, DetectionThresholds({1: 99}, 1, 2)) == []


def test_filtered_tokens_never_detected():
    uni, five = _indexes()
    t = apply_filters(toks("whicli 1864 ,"), FilterConfig(common_words=frozenset({"whicli"})))
    assert detect(t, five, uni, DetectionThresholds({1: 100}, 1, 5)) == []


def test_order_mismatch_is_usage_error():
    uni, five = _indexes()
    with pytest.raises(UsageError):
        detect(toks("a b"), five, uni, DetectionThresholds(window_order=3))


words = st.lists(st.sampled_from("brightly coloured birds in which whicli rare the".split()),
                 min_size=1, max_size=14)


@given(words, st.integers(0, 6000), st.integers(0, 6000), st.integers(0, 4), st.integers(0, 4))
def test_raising_thresholds_never_shrinks_detection(ws, u1, u2, c1, c2):
    uni, five = _indexes()
    t = toks(" ".join(ws))
    lo = DetectionThresholds({1: min(u1, u2)}, min(c1, c2), 5)
    hi = DetectionThresholds({1: max(u1, u2)}, max(c1, c2), 5)
    small = {e.position for e in detect(t, five, uni, lo)}
    big = [e.position for e in detect(t, five, uni, hi)]
    assert small <= set(big)
    assert big == sorted(big)
