import json

import pytest
from hypothesis import given, strategies as st

from trivia_miner.corpus import Article, Corpus, CorpusError, load_corpus, split_paragraphs, write_corpus


def write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


THREE = [
    {"id": "a", "title": "A", "text": "alpha\n\nbeta", "categories": ["X", "Y"]},
    {"id": "b", "title": "B", "text": "gamma", "categories": ["X"]},
    {"id": "c", "title": "C", "text": "delta", "categories": ["Y"], "extra": 1},
]


def test_load_three_articles(tmp_path):
    corpus = load_corpus(write_lines(tmp_path / "c.jsonl", THREE))
    assert corpus.n_docs == 3
    assert list(corpus.articles) == ["a", "b", "c"]
    assert corpus.categories["X"].members == ("a", "b")
    assert corpus.categories["Y"].members == ("a", "c")
    assert corpus.article("a").paragraphs == ("alpha", "beta")
    for art in corpus:
        for c in art.categories:
            assert art.id in corpus.categories[c]
    for name, cat in corpus.categories.items():
        for m in cat.members:
            assert name in corpus.article(m).categories


def test_empty_file(tmp_path):
    p = tmp_path / "e.jsonl"
    p.write_text("")
    corpus = load_corpus(p)
    assert corpus.n_docs == 0
    assert not corpus.categories


def test_duplicate_id_names_the_id(tmp_path):
    p = write_lines(tmp_path / "d.jsonl", [THREE[0], dict(THREE[1], id="a")])
    with pytest.raises(CorpusError, match="'a'"):
        load_corpus(p)


def test_malformed_line_names_line_number(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(json.dumps(THREE[0]) + "\n{not json\n")
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(p)


@pytest.mark.parametrize(
    "bad",
    [
        {"id": 3, "title": "", "text": ""},
        {"id": "x", "title": "", "text": "", "categories": "Y"},
        {"id": "x", "title": 1, "text": ""},
        ["not", "an", "object"],
    ],
)
def test_field_validation(tmp_path, bad):
    p = write_lines(tmp_path / "v.jsonl", [bad])
    with pytest.raises(CorpusError, match="line 1"):
        load_corpus(p)


def test_blank_category_dropped_with_warning(tmp_path):
    p = write_lines(tmp_path / "w.jsonl", [{"id": "a", "title": "", "text": "", "categories": ["  ", "Z"]}])
    corpus = load_corpus(p)
    assert list(corpus.categories) == ["Z"]
    assert corpus.article("a").categories == ("Z",)
    assert corpus.warnings


def test_singletons_retained_and_flagged(tmp_path):
    corpus = load_corpus(write_lines(tmp_path / "s.jsonl", THREE))
    assert corpus.singleton_categories() == []
    solo = Corpus.from_articles([Article("a", "", "", ("Solo",))])
    assert solo.categories["Solo"].is_singleton
    assert solo.singleton_categories() == ["Solo"]


def test_duplicate_categories_collapsed(tmp_path):
    corpus = load_corpus(write_lines(tmp_path / "dup.jsonl", [{"id": "a", "text": "", "categories": ["X", "X"]}]))
    assert corpus.article("a").categories == ("X",)


def test_deterministic_and_round_trip(tmp_path):
    p = write_lines(tmp_path / "c.jsonl", THREE)
    c1, c2 = load_corpus(p), load_corpus(p)
    assert c1 == c2
    write_corpus(c1, tmp_path / "again.jsonl")
    c3 = load_corpus(tmp_path / "again.jsonl")
    assert c3.articles == c1.articles and c3.digest == c1.digest


@pytest.mark.parametrize(
    "text, expected",
    [("A\n\nB", ["A", "B"]), ("A\nB", ["A\nB"]), ("\n\n\n", []), ("  A \n \n\n B  ", ["A", "B"]), ("", [])],
)
def test_split_paragraphs(text, expected):
    assert split_paragraphs(text) == expected


@given(st.text(alphabet=st.sampled_from("ab \n\t\r"), max_size=60))
def test_split_join_split_is_stable(text):
    parts = split_paragraphs(text)
    assert split_paragraphs("\n\n".join(parts)) == parts
    assert all(p and p == p.strip() for p in parts)
    # segments appear in text order
    pos = 0
    for p in parts:
        pos = text.index(p, pos) + len(p)
