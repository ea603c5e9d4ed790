"""Walk through the whole pipeline on a synthetic corpus.

    python3 demos/walkthrough.py [--tokens 20000] [--seed 7]

A closed-vocabulary text is generated, corrupted with single-character
OCR-style substitutions plus a few splits and merges, and then detected,
labeled against the clean text, used to train a ranker and evaluated.
Nothing is written to disk.
"""

import argparse
import time

from ocrcorrect import Config, NoiseSpec, align, make_vocabulary, markov_corpus, synth_corrupt
from ocrcorrect.ngrams import NgramIndex, count_ngrams
from ocrcorrect.pipeline import (correct_text, evaluate_document, label_document, load_resources,
                                 split_errors, train_model)
from ocrcorrect.text import tokenize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tokens", type=int, default=20_000)
    ap.add_argument("--vocab", type=int, default=600)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    t0 = time.perf_counter()

    vocab = make_vocabulary(args.vocab, seed=args.seed)
    clean = markov_corpus(vocab, args.tokens, seed=args.seed)
    print(f"corpus: {args.tokens} tokens over {len(vocab)} words, e.g. {clean[:60]!r}")

    # the corpus counts itself: unigrams for popularity, 5-grams for context
    surfaces = [t.surface for t in tokenize(clean)]
    unigrams = NgramIndex(1, count_ngrams([surfaces], 1))
    contexts = NgramIndex(5, count_ngrams([surfaces], 5))

    noise = NoiseSpec(NoiseSpec.single_character().confusions, word_rate=0.03,
                      split_rate=0.1, merge_rate=0.1)
    ocr = synth_corrupt(clean, noise, seed=args.seed, avoid=vocab)
    print(f"corrupted {len(ocr.errors)} spots, e.g.",
          ", ".join(f"{e.intended!r}->{e.observed!r}" for e in ocr.errors[:4]))

    # every word in this corpus is frequent, so only rare-length filters would
    # get in the way; the lone unigram threshold of 0 turns them off
    config = Config(unigram_thresholds={1: 0}, seed=args.seed,
                    ranker={"n_stages": 50, "max_depth": 3})
    res = load_resources(config, unigrams, contexts)

    doc = label_document(ocr.text, clean, res)
    cats = {}
    for o in doc.outcomes:
        cats[o.category] = cats.get(o.category, 0) + 1
    print("detection outcomes:", ", ".join(f"{k}={v}" for k, v in sorted(cats.items())))

    train_part, test_part = split_errors(doc.labeled, config.train_fraction, config.seed)
    run = train_model(train_part, res)
    print(f"trained on {run.n_errors_used}/{run.n_errors_offered} errors, {run.n_rows} candidate rows, "
          f"{len(run.model.booster.trees)} stages")

    report = evaluate_document(doc, test_part, res, run.model)
    print()
    print(report.format_text())

    fixed, corrections = correct_text(ocr.text, res, run.model)
    before = len(align(tokenize(ocr.text), tokenize(clean)))
    after = len(align(tokenize(fixed), tokenize(clean)))
    print(f"correcting the whole text: {before} -> {after} mismatches against the clean copy")
    # each piece of a split word is corrected on its own, so both halves may
    # turn into the whole word; merges need a two-word candidate and stay put
    for c in corrections[:5]:
        print(f"  {c.error.surface!r}: " + ", ".join(f"{t} ({v:.2f})" for t, v in c.suggestions[:3]))
    print(f"\ndone in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
