import json
import subprocess
import sys

import pytest

from ocrcorrect.cli import byte_offsets, main
from ocrcorrect.synthetic import NoiseSpec, make_vocabulary, markov_corpus, synth_corrupt


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "ocrcorrect.cli", *map(str, args)],
                          capture_output=True, cwd=cwd)


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    vocab = make_vocabulary(120, seed=8)
    clean = markov_corpus(vocab, 4000, seed=8)
    (d / "clean.txt").write_text(clean, encoding="utf-8")
    ocr = synth_corrupt(clean, NoiseSpec.single_character(word_rate=0.03), seed=8, avoid=vocab)
    (d / "ocr.txt").write_text(ocr.text, encoding="utf-8")
    assert main(["build-index", "--text", str(d / "clean.txt"), "--out-dir", str(d / "grams"),
                 "--max-order", "5"]) == 0
    (d / "config.json").write_text(json.dumps({
        "unigram_files": ["grams/1gms.txt"], "ngram_files": ["grams/5gms.txt"],
        "unigram_thresholds": {"1": 0}, "ranker": {"n_stages": 10, "max_depth": 2},
        "model": "model.json", "seed": 4,
    }))
    return d


def test_byte_offsets():
    assert byte_offsets("aé€𝄞b").tolist() == [0, 1, 3, 6, 10, 11]
    assert byte_offsets("").tolist() == [0]


def test_build_index_from_config(work, capsys):
    assert main(["build-index", "--config", str(work / "config.json")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[0] for line in lines] == ["1", "5"]


def test_detect_reports_byte_offsets(work, capsys):
    assert main(["detect", "--config", str(work / "config.json"), str(work / "ocr.txt")]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "start\tend\tsurface\tunigram_freq\tbest_context_freq"
    raw = (work / "ocr.txt").read_bytes()
    assert len(rows) > 50
    for row in rows[1:]:
        s, e, surface, *_ = row.split("\t")
        assert raw[int(s):int(e)].decode("utf-8") == surface


def test_suggest_header_and_width(work, tmp_path):
    out = tmp_path / "s.tsv"
    assert main(["suggest", "--config", str(work / "config.json"), "--delta", "1",
                 str(work / "ocr.txt"), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    header = lines[0].split("\t")
    assert header[:4] == ["start", "end", "surface", "candidate"]
    assert all(len(line.split("\t")) == len(header) for line in lines)


@pytest.fixture(scope="module")
def trained(work):
    r = run("train", "--config", work / "config.json", "--ocr", work / "ocr.txt",
            "--truth", work / "clean.txt", "--write-rows", work / "rows.tsv")
    assert r.returncode == 0, r.stderr
    return r.stdout.decode()


def test_train_summary(work, trained):
    stats = dict(line.split("\t") for line in trained.splitlines())
    assert int(stats["errors_used"]) <= int(stats["errors_offered"])
    assert int(stats["stages"]) >= 1
    assert json.loads((work / "model.json").read_text())["format_version"] == 1


def test_train_from_rows_matches(work, trained, tmp_path):
    model = tmp_path / "m.json"
    assert main(["train", "--config", str(work / "config.json"), "--rows", str(work / "rows.tsv"),
                 "--model", str(model)]) == 0
    assert model.read_bytes() == (work / "model.json").read_bytes()


def test_train_and_evaluate_are_reproducible(work, trained, tmp_path):
    r = run("train", "--config", work / "config.json", "--ocr", work / "ocr.txt",
            "--truth", work / "clean.txt", "--model", tmp_path / "again.json")
    assert r.returncode == 0
    assert (tmp_path / "again.json").read_bytes() == (work / "model.json").read_bytes()
    reports = []
    for _ in range(2):
        r = run("evaluate", "--config", work / "config.json", "--ocr", work / "ocr.txt",
                "--truth", work / "clean.txt", "--format", "tsv")
        assert r.returncode == 0, r.stderr
        reports.append(r.stdout)
    assert reports[0] == reports[1]
    keys = [line.split(b"\t")[1] for line in reports[0].splitlines()[1:]]
    assert b"recall_total" in keys and b"total.P@10" in keys


def test_correct_repairs_and_keeps_clean_text(work, trained, tmp_path):
    out, sugg = tmp_path / "fixed.txt", tmp_path / "sugg.tsv"
    assert main(["correct", "--config", str(work / "config.json"), str(work / "ocr.txt"),
                 "-o", str(out), "--suggestions", str(sugg), "--suggest-k", "3"]) == 0
    clean = (work / "clean.txt").read_text()
    ocr = (work / "ocr.txt").read_text()
    fixed = out.read_text()
    diff = lambda a, b: sum(x != y for x, y in zip(a.split(), b.split()))
    assert diff(fixed, clean) < diff(ocr, clean) / 2
    ranks = [int(line.split("\t")[3]) for line in sugg.read_text().splitlines()[1:]]
    assert ranks and max(ranks) <= 3
    # already-clean text passes through byte for byte
    assert main(["correct", "--config", str(work / "config.json"), str(work / "clean.txt"),
                 "-o", str(tmp_path / "same.txt")]) == 0
    assert (tmp_path / "same.txt").read_bytes() == (work / "clean.txt").read_bytes()


def test_analyze_features(work, tmp_path):
    cov, dist = tmp_path / "cov.tsv", tmp_path / "dist.tsv"
    assert main(["analyze-features", "--config", str(work / "config.json"), "--ocr", str(work / "ocr.txt"),
                 "--truth", str(work / "clean.txt"), "-o", str(cov), "--distinctiveness", str(dist)]) == 0
    rows = {line.split("\t")[0]: line.split("\t") for line in cov.read_text().splitlines()[1:]}
    assert float(rows["bounded"][2]) == 1.0
    assert dist.read_text().startswith("category\tfeature\tlocated_by_1")


@pytest.mark.parametrize("args, code, message", [
    (["detect", "--config", "nope.json", "x.txt"], 1, b"config file not found"),
    (["detect", "x.txt"], 1, b"no unigram_files"),
    (["correct", "--config", "config.json", "ocr.txt"], 1, b"model"),
    (["evaluate", "--config", "config.json"], 2, b"--ocr"),
    (["detect", "--delta", "two", "x.txt"], 2, b"invalid int"),
    (["frobnicate"], 2, b"invalid choice"),
])
def test_exit_codes(work, args, code, message):
    if args[0] == "correct":
        args = args[:3] + ["--model", "missing-model.json"] + args[3:]
    r = run(*args, cwd=work)
    assert r.returncode == code
    assert message in r.stderr
    assert r.stdout == b""


def test_invalid_utf8_is_reported(work, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"abc \xff def")
    r = run("detect", "--config", work / "config.json", bad)
    assert r.returncode == 1
    assert b"invalid UTF-8 at byte offset 4" in r.stderr
