"""Synthetic corpora with known trivia structure, for tests and demos.

Every article gets ten words of its own. A word that belongs to a topic has
the vector ``sqrt(rho) * topic + sqrt(1 - rho) * noise``, so two articles from
the same topic are about ``rho`` similar. The planted target's words mix all
three of its topics equally; that makes it an outsider in the tight category
and a typical member of the two loose decoys.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Article, Corpus, write_corpus
from .embeddings import EmbeddingStore, write_store

TARGET_ID = "target"
TIGHT = "Tight group"
DECOY_A = "Decoy alpha"
DECOY_B = "Decoy beta"


@dataclass(frozen=True)
class Topic:
    name: str
    members: int
    rho: float


def _word(prefix: str, i: int, j: int) -> str:
    # ends in a digit, so the Porter stemmer leaves it alone
    return f"{prefix}{i:02d}w{j}"


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _text(words: list[str], paragraphs: int = 2) -> str:
    # word j repeated (10 - j) times fixes the TF-IDF order
    chunks = [" ".join([w] * (len(words) - j)) for j, w in enumerate(words)]
    step = max(1, len(chunks) // paragraphs)
    paras = [" ".join(chunks[i:i + step]) for i in range(0, len(chunks), step)]
    return "\n\n".join(paras)


def planted_corpus(
    seed: int = 7,
    dim: int = 128,
    tight_rho: float = 0.8,
    decoy_rho: float = 0.25,
    fillers: int = 2,
) -> tuple[Corpus, EmbeddingStore]:
    """Build the planted-outlier corpus and its embeddings.

    Default layout (30 articles): 10 tight members at ``tight_rho``, 9 and 8
    decoy members at ``decoy_rho``, the target in all three categories, and
    ``fillers`` unrelated articles sharing a "Fillers" category.
    """
    rng = np.random.default_rng(seed)
    topics = [Topic(TIGHT, 10, tight_rho), Topic(DECOY_A, 9, decoy_rho), Topic(DECOY_B, 8, decoy_rho)]
    directions = {t.name: _unit(rng.normal(size=dim)) for t in topics}

    terms: list[str] = []
    vectors: list[np.ndarray] = []
    articles: list[Article] = []

    def add_words(prefix: str, i: int, make) -> list[str]:
        words = [_word(prefix, i, j) for j in range(10)]
        for w in words:
            terms.append(w)
            vectors.append(make())
        return words

    for ti, topic in enumerate(topics):
        u = directions[topic.name]
        prefix = "t" + "abc"[ti]
        for i in range(topic.members):
            words = add_words(
                prefix, i, lambda: np.sqrt(topic.rho) * u + np.sqrt(1 - topic.rho) * _unit(rng.normal(size=dim))
            )
            art_id = f"{topic.name.split()[-1].lower()}_{i:02d}"
            articles.append(Article(art_id, f"{topic.name} member {i}", _text(words), (topic.name,)))

    mix = sum(directions.values())
    words = add_words("tz", 0, lambda: 0.5 * mix + 0.5 * _unit(rng.normal(size=dim)))
    articles.append(Article(TARGET_ID, "Planted target", _text(words), tuple(t.name for t in topics)))

    for i in range(fillers):
        words = add_words("tf", i, lambda: _unit(rng.normal(size=dim)))
        articles.append(Article(f"filler_{i:02d}", f"Filler {i}", _text(words), ("Fillers",)))

    store = EmbeddingStore(terms, np.array(vectors))
    return Corpus.from_articles(articles), store


def write_planted(directory: str | Path, **kwargs) -> tuple[Path, Path]:
    """Write ``corpus.jsonl`` and ``vectors.bin`` for :func:`planted_corpus`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpus, store = planted_corpus(**kwargs)
    corpus_path = directory / "corpus.jsonl"
    vectors_path = directory / "vectors.bin"
    write_corpus(corpus, corpus_path)
    write_store(store, vectors_path, binary=True)
    return corpus_path, vectors_path
