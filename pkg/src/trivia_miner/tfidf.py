"""Document-frequency statistics and top-K TF-IDF term extraction."""

from __future__ import annotations

import hashlib
import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus
from .textnorm import DEFAULT_STOPWORDS, normalize_pairs

DF_MAGIC = b"TMDF1"
_U64 = struct.Struct("<Q")
_U16 = struct.Struct("<H")


class DfIndexFormatError(ValueError):
    """Raised for a truncated or corrupted DfIndex file."""


@dataclass(frozen=True)
class DfIndex:
    df: Mapping[str, int]
    n_docs: int
    min_df: int

    def __len__(self) -> int:
        return len(self.df)

    def __contains__(self, term: object) -> bool:
        return term in self.df

    def idf(self, term: str) -> float:
        return math.log(self.n_docs / self.df[term])

    def digest(self) -> str:
        return hashlib.sha256(encode_df_index(self)).hexdigest()


@dataclass(frozen=True)
class RankedTerms:
    """An article's top terms, best first. Ties are ordered by term."""

    terms: tuple[tuple[str, float], ...]
    k: int

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.terms)


@dataclass
class SurfaceLexicon:
    """For each stem, how often each case-folded surface form produced it."""

    forms: dict[str, Counter] = field(default_factory=dict)

    def add(self, pairs: Iterable[tuple[str, str]]) -> None:
        for surface, s in pairs:
            self.forms.setdefault(s, Counter())[surface] += 1

    def surfaces(self, stem: str) -> list[str]:
        """Surface forms of ``stem``, most frequent first, ties by spelling."""
        counts = self.forms.get(stem)
        if not counts:
            return []
        return sorted(counts, key=lambda w: (-counts[w], w))


def document_terms(corpus: Corpus, stopwords=DEFAULT_STOPWORDS) -> list[list[tuple[str, str]]]:
    return [normalize_pairs(a.text, stopwords) for a in corpus]


def build_df_index(
    corpus: Corpus | Iterable[Sequence[str]],
    min_df: int = 10,
    stopwords=DEFAULT_STOPWORDS,
    lexicon: SurfaceLexicon | None = None,
) -> DfIndex:
    """Count, for each normalized term, the documents that contain it.

    ``corpus`` is either a :class:`Corpus` (its article texts are normalized)
    or an iterable of pre-normalized token sequences. Terms with fewer than
    ``min_df`` documents are pruned; ``min_df`` below 1 behaves as 1.
    If ``lexicon`` is given, it is filled with the stem -> surface counts seen.
    """
    if isinstance(corpus, Corpus):
        docs = []
        for pairs in document_terms(corpus, stopwords):
            if lexicon is not None:
                lexicon.add(pairs)
            docs.append([s for _, s in pairs])
    else:
        docs = [list(d) for d in corpus]
    if not docs:
        raise ValueError("cannot build a document-frequency index from an empty corpus")

    min_df = max(1, int(min_df))
    df: Counter = Counter()
    for tokens in docs:
        df.update(set(tokens))
    kept = {t: n for t, n in sorted(df.items()) if n >= min_df}
    return DfIndex(kept, len(docs), min_df)


def top_tfidf(tokens: Sequence[str], index: DfIndex, k: int = 10) -> RankedTerms:
    """Rank the terms of one token stream by raw-count TF times ``ln(N/df)``.

    Terms missing from ``index`` and terms scoring zero are left out, so the
    result may hold fewer than ``k`` entries.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = []
    for term, tf in Counter(tokens).items():
        n = index.df.get(term)
        if n is None:
            continue
        score = tf * math.log(index.n_docs / n)
        if score > 0:
            scored.append((term, score))
    scored.sort(key=lambda ts: (-ts[1], ts[0]))
    return RankedTerms(tuple(scored[:k]), k)


def encode_df_index(index: DfIndex) -> bytes:
    parts = [DF_MAGIC, _U64.pack(index.n_docs), _U64.pack(index.min_df), _U64.pack(len(index.df))]
    for term in sorted(index.df):
        raw = term.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"term too long to persist ({len(raw)} bytes)")
        parts += [_U16.pack(len(raw)), raw, _U64.pack(index.df[term])]
    return b"".join(parts)


def write_df_index(index: DfIndex, path: str | Path) -> None:
    Path(path).write_bytes(encode_df_index(index))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise DfIndexFormatError(
                f"truncated file at byte offset {self.pos}: expected {n} bytes for {what}"
            )
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u64(self, what: str) -> int:
        return _U64.unpack(self.take(8, what))[0]

    def u16(self, what: str) -> int:
        return _U16.unpack(self.take(2, what))[0]


def decode_df_index(data: bytes) -> DfIndex:
    r = _Reader(data)
    if r.take(len(DF_MAGIC), "header") != DF_MAGIC:
        raise DfIndexFormatError("bad header: not a TMDF1 document-frequency index")
    n_docs = r.u64("n_docs")
    min_df = r.u64("min_df")
    count = r.u64("entry count")
    df: dict[str, int] = {}
    for _ in range(count):
        offset = r.pos
        raw = r.take(r.u16("term length"), "term bytes")
        try:
            term = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise DfIndexFormatError(f"invalid UTF-8 term at byte offset {offset}") from None
        n = r.u64("document frequency")
        if term in df:
            raise DfIndexFormatError(f"duplicate term {term!r} at byte offset {offset}")
        if not 1 <= n <= n_docs or n < min_df:
            raise DfIndexFormatError(f"df {n} out of range for term {term!r} at byte offset {offset}")
        df[term] = n
    if r.pos != len(data):
        raise DfIndexFormatError(f"{len(data) - r.pos} trailing bytes at byte offset {r.pos}")
    return DfIndex(df, n_docs, min_df)


def read_df_index(path: str | Path) -> DfIndex:
    return decode_df_index(Path(path).read_bytes())
