"""Text normalization: tokenize, case-fold, drop stopwords, Porter-stem."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from nltk.stem.porter import PorterStemmer

# maximal runs of Unicode letters/digits; underscore is a separator
_TOKEN = re.compile(r"[^\W_]+")

_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@lru_cache(maxsize=200_000)
def stem(word: str) -> str:
    return _stemmer.stem(word, to_lowercase=False)


def parse_stopwords(lines: Iterable[str]) -> frozenset[str]:
    words = set()
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line.casefold())
    return frozenset(words)


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a stopword file (one word per line, ``#`` comments).

    With no path, the bundled English list is returned.
    """
    if path is None:
        text = resources.files("trivia_miner").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_stopwords(text.splitlines())


DEFAULT_STOPWORDS = load_stopwords()


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text)


def fold(token: str) -> str:
    # upper() first so letters whose lowercase has no uppercase twin (dotless i)
    # fold the same way as their uppercased text
    return token.upper().casefold()


def normalize_pairs(text: str, stopwords: frozenset[str] | set[str] = DEFAULT_STOPWORDS) -> list[tuple[str, str]]:
    """Return ``(surface, stem)`` for every kept token, in text order.

    ``surface`` is the case-folded token before stemming. A stem that itself
    lands on a stopword (``having`` -> ``have``) is dropped too.
    """
    out = []
    # fold before splitting: uppercasing can decompose a letter into a base
    # letter plus a combining mark, which the tokenizer would split off
    for folded in tokenize(fold(text)):
        if folded in stopwords:
            continue
        s = stem(folded)
        if s and s not in stopwords:
            out.append((folded, s))
    return out


def normalize(text: str, stopwords: frozenset[str] | set[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Normalize raw text into a list of stemmed terms.

    >>> normalize("The Adventures of Sherlock Holmes", {"the", "of"})
    ['adventur', 'sherlock', 'holm']
    """
    return [s for _, s in normalize_pairs(text, stopwords)]
