import pytest

from ocrcorrect.candidates import Lexicon
from ocrcorrect.ngrams import NgramIndex, count_ngrams
from ocrcorrect.text import tokenize


def indexes_from_text(text, order=5):
    """Unigram and order-n indexes counted from ``text``'s own tokens."""
    surfaces = [t.surface for t in tokenize(text)]
    return (NgramIndex(1, count_ngrams([surfaces], 1)),
            NgramIndex(order, count_ngrams([surfaces], order)))


@pytest.fixture
def bird_text():
    return ("the thrush sang in the tree . brightly coloured birds in which "
            "the thrush sang . the wren sang in the hedge . brightly coloured birds in which "
            "the wren nested .\n")


@pytest.fixture
def bird_indexes(bird_text):
    return indexes_from_text(bird_text)


@pytest.fixture
def bird_lexicon(bird_indexes):
    return Lexicon.from_unigrams(bird_indexes[0])


class World:
    """A small synthetic corpus, its corrupted copy and everything derived from them."""

    def __init__(self, vocab_size=150, n_tokens=6000, word_rate=0.03, seed=3):
        from ocrcorrect.config import Config
        from ocrcorrect.pipeline import label_document, load_resources
        from ocrcorrect.synthetic import NoiseSpec, make_vocabulary, markov_corpus, synth_corrupt

        self.vocab = make_vocabulary(vocab_size, seed=seed)
        self.clean = markov_corpus(self.vocab, n_tokens, seed=seed)
        self.unigrams, self.contexts = indexes_from_text(self.clean)
        self.corruption = synth_corrupt(self.clean, NoiseSpec.single_character(word_rate=word_rate),
                                        seed=seed, avoid=self.vocab)
        self.config = Config(unigram_thresholds={1: 0}, seed=seed)
        self.res = load_resources(self.config, self.unigrams, self.contexts)
        self.doc = label_document(self.corruption.text, self.clean, self.res)


@pytest.fixture(scope="session")
def world():
    return World()
