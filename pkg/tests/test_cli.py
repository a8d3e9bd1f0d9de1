import io
import json
import subprocess
import sys

import numpy as np
import pytest

from trivia_miner.cli import main
from trivia_miner.corpus import Article, write_corpus
from trivia_miner.embeddings import EmbeddingStore, write_store
from trivia_miner.synthetic import TIGHT, write_planted


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def jsonl(text):
    return [json.loads(line) for line in text.splitlines()]


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    d = tmp_path_factory.mktemp("planted")
    corpus, vectors = write_planted(d)
    return ["--corpus", str(corpus), "--embeddings", str(vectors), "--min-df", "1"]


@pytest.fixture
def eq1_files(tmp_path):
    """Two articles whose top-2 terms are [alpha, beta] and [alpha, gamma]."""
    gram = np.array([[1, 0.5, 0.2], [0.5, 1, 0.4], [0.2, 0.4, 1]])
    vecs = np.linalg.cholesky(gram)
    store = EmbeddingStore(["alpha", "beta", "gamma", "delta"], np.vstack([vecs, [[0.3, 0.3, 0.9]]]))
    write_store(store, tmp_path / "v.txt", binary=False)
    write_corpus(
        [
            Article("A", "Article A", "alpha alpha alpha alpha beta", ("Pair",)),
            Article("B", "Article B", "alpha alpha alpha alpha gamma", ("Pair",)),
            Article("C", "Article C", "delta", ()),
        ],
        tmp_path / "c.jsonl",
    )
    return ["--corpus", str(tmp_path / "c.jsonl"), "--embeddings", str(tmp_path / "v.txt"),
            "--min-df", "1", "--k", "2"]


def test_similarity_hand_example(eq1_files):
    assert run("similarity", "A", "B", *eq1_files) == (0, "0.816667\n")
    assert run("similarity", "B", "A", *eq1_files) == (0, "0.816667\n")
    assert run("similarity", "A", "A", *eq1_files) == (0, "1.000000\n")


def test_similarity_unknown_id(eq1_files, capsys):
    code, _ = run("similarity", "A", "Nope", *eq1_files)
    assert code == 3
    assert "Nope" in capsys.readouterr().err


def test_outliers_two_member_category(eq1_files):
    code, out = run("outliers", "Pair", *eq1_files)
    rows = jsonl(out)
    assert code == 0 and len(rows) == 2
    assert rows[0]["surprise"] == rows[1]["surprise"] == pytest.approx(1 / (4.9 / 6), abs=1e-6)


def test_explain_single_paragraph(eq1_files):
    code, out = run("explain", "A", "Pair", *eq1_files)
    assert code == 0 and jsonl(out)[0]["paragraph"] == 0


def test_top_trivia_planted(planted):
    code, out = run("top-trivia", "target", *planted)
    rows = jsonl(out)
    assert code == 0
    assert rows[0]["category"] == TIGHT
    assert set(rows[0]) == {"category", "surprise", "cohesiveness", "trivia", "sampled", "sample_size"}
    assert rows[0]["trivia"] > 1


def test_workers_do_not_change_output(planted):
    outs = {run("top-trivia", "target", *planted, "--workers", str(w), "--seed", "5")[1] for w in (1, 8)}
    assert len(outs) == 1
    outs = {run("outliers", TIGHT, *planted, "--workers", str(w), "--sample-cap", "4")[1] for w in (1, 8)}
    assert len(outs) == 1


def test_outliers_planted_first(planted):
    code, out = run("outliers", TIGHT, *planted)
    assert code == 0 and jsonl(out)[0]["article"] == "target"


def test_table_output(planted):
    code, out = run("top-trivia", "target", *planted, "--output", "table")
    lines = out.splitlines()
    assert code == 0 and lines[0].split()[:2] == ["category", "surprise"]
    assert lines[1].startswith(TIGHT)


def test_unknown_article_lists_titles(planted, capsys):
    code, _ = run("top-trivia", "targte", *planted)
    err = capsys.readouterr().err
    assert code == 3 and "Planted target" in err


def test_unknown_category(planted):
    assert run("outliers", "No such group", *planted)[0] == 3


def test_threshold_filters(planted):
    _, out = run("top-trivia", "target", *planted, "--threshold", "1.4")
    assert [r["category"] for r in jsonl(out)] == [TIGHT]


def test_build_index_deterministic(tmp_path, eq1_files):
    corpus = eq1_files[1]
    i1, i2 = tmp_path / "i1.tmdf", tmp_path / "i2.tmdf"
    assert run("build-index", "--corpus", corpus, "--min-df", "1", "--index", str(i1)) == (0, "terms=4 n_docs=3\n")
    run("build-index", "--corpus", corpus, "--min-df", "1", "--index", str(i2))
    assert i1.read_bytes() == i2.read_bytes()
    # scoring with the saved index matches building it on the fly
    assert run("similarity", "A", "B", *eq1_files, "--index", str(i1)) == (0, "0.816667\n")


def test_build_index_empty_warns(tmp_path, eq1_files, caplog):
    code, out = run("build-index", "--corpus", eq1_files[1], "--min-df", "50", "--index", str(tmp_path / "e"))
    assert code == 0 and out == "terms=0 n_docs=3\n"
    assert "empty" in caplog.text


def test_unreadable_paths_exit_2(tmp_path, eq1_files, capsys):
    missing = str(tmp_path / "missing.jsonl")
    assert run("build-index", "--corpus", missing, "--index", str(tmp_path / "i"))[0] == 2
    assert missing in capsys.readouterr().err
    args = list(eq1_files)
    args[3] = str(tmp_path / "nope.txt")
    assert run("similarity", "A", "B", *args)[0] == 2


def test_corrupt_inputs_exit_2(tmp_path, eq1_files):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"2 3\nab")
    args = list(eq1_files)
    args[3] = str(bad)
    assert run("similarity", "A", "B", *args)[0] == 2
    idx = tmp_path / "bad.tmdf"
    idx.write_bytes(b"TMDF1\x01")
    assert run("similarity", "A", "B", *eq1_files, "--index", str(idx))[0] == 2
    broken = tmp_path / "broken.jsonl"
    broken.write_text('{"id": "a"}\n{oops\n')
    assert run("top-trivia", "a", "--corpus", str(broken), "--embeddings", eq1_files[3])[0] == 2


@pytest.mark.parametrize("flags", [["--k", "0"], ["--workers", "0"], ["--sample-cap", "1"], ["--k", "x"], ["--bogus"]])
def test_config_errors_exit_4(eq1_files, flags):
    with pytest.raises(SystemExit) as exc:
        code, _ = run("similarity", "A", "B", *eq1_files, *flags)
        raise SystemExit(code)
    assert exc.value.code == 4


def test_missing_embeddings_is_config_error(eq1_files):
    assert run("similarity", "A", "B", "--corpus", eq1_files[1])[0] == 4


def test_cache_file_and_env_override(tmp_path, planted, monkeypatch):
    cache = tmp_path / "sim.cache"
    cold = run("top-trivia", "target", *planted, "--cache", str(cache))[1]
    assert cache.read_bytes()[:5] == b"TMSC1"
    warm = run("top-trivia", "target", *planted, "--cache", str(cache))[1]
    assert warm == cold

    env_cache = tmp_path / "env.cache"
    monkeypatch.setenv("TRIVIA_MINER_CACHE", str(env_cache))
    run("top-trivia", "target", *planted, "--cache", str(tmp_path / "ignored.cache"))
    assert env_cache.exists() and not (tmp_path / "ignored.cache").exists()


def test_corrupt_cache_exit_2(tmp_path, planted):
    cache = tmp_path / "c.cache"
    cache.write_bytes(b"TMSC1" + bytes(10))
    assert run("top-trivia", "target", *planted, "--cache", str(cache))[0] == 2


def test_module_entry_point(planted):
    proc = subprocess.run(
        [sys.executable, "-m", "trivia_miner", "top-trivia", "target", *planted],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[0])["category"] == TIGHT


# --- an Obama-shaped corpus: politician who also won a Grammy ---------------

MUSIC = ["album", "song", "singer", "grammy", "record", "band", "guitar", "tour", "jazz", "concert"]
POLITICS = ["senate", "president", "election", "congress", "democrat", "law", "vote", "campaign", "governor", "policy"]


@pytest.fixture
def obama_files(tmp_path):
    rng = np.random.default_rng(0)
    dim = 64
    topics = {"m": rng.normal(size=dim), "p": rng.normal(size=dim)}
    terms, vecs = [], []
    for key, words in (("m", MUSIC), ("p", POLITICS)):
        for w in words:
            # embeddings hold the inflected surface forms
            for form in (w, w + "s"):
                terms.append(form)
                vecs.append(topics[key] / np.linalg.norm(topics[key]) * 2 + rng.normal(size=dim) * 0.4)
    write_store(EmbeddingStore(terms, np.array(vecs)), tmp_path / "v.bin")

    def text(words, seed):
        r = np.random.default_rng(seed)
        picks = r.choice(words, size=6, replace=False)
        return " ".join(f"{w}s " * int(c) for w, c in zip(picks, r.integers(1, 6, size=6)))

    arts = [Article("obama", "Barack Obama",
                    text(POLITICS, 99) + "\n\nObama won Best Spoken Word Album Grammy Awards.",
                    ("Grammy Award winners", "Democratic Party Presidents"))]
    arts += [Article(f"musician{i}", f"Musician {i}", text(MUSIC, i), ("Grammy Award winners",)) for i in range(8)]
    arts += [Article(f"president{i}", f"President {i}", text(POLITICS, 50 + i), ("Democratic Party Presidents",))
             for i in range(6)]
    write_corpus(arts, tmp_path / "c.jsonl")
    return ["--corpus", str(tmp_path / "c.jsonl"), "--embeddings", str(tmp_path / "v.bin"), "--min-df", "2"]


def test_obama_shaped_fixture(obama_files):
    code, out = run("top-trivia", "obama", *obama_files)
    rows = jsonl(out)
    assert code == 0
    assert rows[0]["category"] == "Grammy Award winners"
    assert rows[0]["trivia"] > 1 > rows[1]["trivia"] - 0.2
    code, out = run("explain", "obama", "Grammy Award winners", *obama_files)
    assert "Grammy" in jsonl(out)[0]["text"]
