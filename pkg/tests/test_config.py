import json

import pytest

from ocrcorrect.config import Config
from ocrcorrect.errors import ConfigError


def test_defaults():
    c = Config()
    assert (c.delta, c.window_order, c.top_k, c.train_fraction) == (3, 5, 10, 0.8)
    assert c.unigram_thresholds[7] == 200
    assert c.alphas == (0.25, 0.25, 0.25, 0.25)


def test_load_resolves_paths(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({
        "unigram_files": ["data/1gms.txt"], "ngram_files": ["data/5gms.txt"],
        "lexicon": "words.txt", "existence_lexicons": [{"name": "taxa", "path": "taxa.txt"}, "extra.txt"],
        "unigram_thresholds": {"3": 5},
    }))
    c = Config.load(tmp_path / "cfg.json")
    assert c.unigram_files == (str(tmp_path / "data/1gms.txt"),)
    assert c.lexicon == str(tmp_path / "words.txt")
    assert c.existence_lexicons == ({"name": "taxa", "path": str(tmp_path / "taxa.txt")},
                                    {"path": str(tmp_path / "extra.txt")})
    assert c.unigram_thresholds == {3: 5}


@pytest.mark.parametrize("data, message", [
    ({"delat": 2}, "unknown config key"),
    ({"delta": -1}, "delta"),
    ({"window_order": 1}, "window_order"),
    ({"search_method": "bktree"}, "search_method"),
    ({"similarity_normalization": "max"}, "similarity_normalization"),
    ({"alphas": [1, 0]}, "alphas"),
    ({"train_fraction": 1.0}, "train_fraction"),
    ({"top_k": 0}, "top_k"),
    ({"cv_folds": 1}, "cv_folds"),
    ({"ranker": {"learning_rate": 0.1}}, "ranker"),
    ({"existence_lexicons": [{"name": "x"}]}, "without a path"),
])
def test_invalid_values(data, message):
    with pytest.raises(ConfigError, match=message):
        Config.from_dict(data)


def test_window_order_one_allowed_without_context_features():
    c = Config(window_order=1, disabled_features=("exact_context", "relaxed_context"))
    assert c.window_order == 1


@pytest.mark.parametrize("content, message", [
    (None, "not found"),
    ("{oops", "invalid JSON"),
    ("[1, 2]", "object"),
])
def test_load_failures(tmp_path, content, message):
    path = tmp_path / "cfg.json"
    if content is not None:
        path.write_text(content)
    with pytest.raises(ConfigError, match=message):
        Config.load(path)


def test_override_skips_none():
    c = Config().override(delta=2, top_k=None)
    assert (c.delta, c.top_k) == (2, 10)
    with pytest.raises(ConfigError):
        Config().override(bogus=1)
    with pytest.raises(ConfigError):
        Config().override(delta=-3)


def test_check_files(tmp_path):
    with pytest.raises(ConfigError, match="unigram_files"):
        Config().check_files()
    Config().check_files(need_indexes=False)
    uni = tmp_path / "1gms.txt"
    uni.write_text("a\t1\n")
    c = Config(unigram_files=[str(uni)], ngram_files=[str(tmp_path / "missing.txt")])
    with pytest.raises(ConfigError, match="missing.txt"):
        c.check_files()


def test_to_dict_round_trip():
    c = Config(delta=2, ranker={"n_stages": 5}, existence_lexicons=["x.txt"])
    back = Config.from_dict(json.loads(json.dumps(c.to_dict())))
    assert back == c
