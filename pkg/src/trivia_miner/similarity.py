"""Article-article similarity: weighted best-match over top TF-IDF terms.

For top-term lists ``T1`` and ``T2`` of length at most ``k``::

    sigma = 1/z * sum_i w(i) * (max_j s(T1[i], T2[j]) + max_j s(T2[i], T1[j]))

with ``w(i) = k - i + 1``. Positions past the end of a short list,
out-of-vocabulary terms, and terms with no in-vocabulary partner contribute 0
to the sum. ``z`` is the total weight of the in-vocabulary positions of both
lists; for two full in-vocabulary lists that is ``k (k + 1)``, and in general
it keeps the similarity of a term list with itself at exactly 1.
"""

from __future__ import annotations

import hashlib
import logging
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

from .corpus import Corpus
from .tfidf import DfIndex, RankedTerms, top_tfidf
from .textnorm import DEFAULT_STOPWORDS, normalize

logger = logging.getLogger(__name__)

WEIGHTING_SCHEME = "linear-v1"
CACHE_MAGIC = b"TMSC1"
_U64 = struct.Struct("<Q")
_U16 = struct.Struct("<H")
_F64 = struct.Struct("<d")


class WordSimilarity(Protocol):
    def word_similarity(self, w1: str, w2: str) -> float | None: ...

    def similarity_matrix(self, terms1: Sequence[str], terms2: Sequence[str]) -> np.ndarray: ...

    def __contains__(self, term: object) -> bool: ...


@dataclass(frozen=True)
class SimilarityConfig:
    k: int = 10
    weights: tuple[float, ...] = field(init=False)
    z: float = field(init=False)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "weights", tuple(float(self.k - i) for i in range(self.k)))
        object.__setattr__(self, "z", float(self.k * (self.k + 1)))


def _as_words(terms: RankedTerms | Sequence[str], k: int) -> tuple[str, ...]:
    words = terms.words if isinstance(terms, RankedTerms) else tuple(terms)
    if len(words) > k:
        raise ValueError(f"term list has {len(words)} entries, more than k={k}")
    return words


def _best_matches(m: np.ndarray, axis: int) -> list[float]:
    # NaN marks an OOV pair; a term with no finite candidate scores 0
    masked = np.where(np.isnan(m), -np.inf, m)
    best = masked.max(axis=axis)
    return [float(b) if b != -np.inf else 0.0 for b in best]


def article_similarity(
    t1: RankedTerms | Sequence[str],
    t2: RankedTerms | Sequence[str],
    words: WordSimilarity,
    cfg: SimilarityConfig = SimilarityConfig(),
) -> float:
    a = _as_words(t1, cfg.k)
    b = _as_words(t2, cfg.k)
    if not a and not b:
        logger.warning("similarity of two empty term lists is defined as 0")
        return 0.0

    fwd = [0.0] * cfg.k
    bwd = [0.0] * cfg.k
    if a and b:
        m = words.similarity_matrix(a, b)
        fwd[: len(a)] = _best_matches(m, axis=1)
        bwd[: len(b)] = _best_matches(m, axis=0)

    z = 0.0
    for w, t in zip(cfg.weights, a):
        if t in words:
            z += w
    for w, t in zip(cfg.weights, b):
        if t in words:
            z += w
    if z == 0.0:
        return 0.0

    total = 0.0
    for w, f, g in zip(cfg.weights, fwd, bwd):
        total += w * (f + g)
    return min(1.0, max(-1.0, total / z))


def generation_tag(
    corpus_digest: str,
    embedding_digest: str,
    k: int,
    scheme: str = WEIGHTING_SCHEME,
    *extra: str,
) -> bytes:
    """32-byte digest binding cached values to the inputs that produced them."""
    h = hashlib.sha256()
    for part in (corpus_digest, embedding_digest, str(k), scheme, *extra):
        h.update(part.encode("utf-8"))
        h.update(b"\0")
    return h.digest()


class CacheFormatError(ValueError):
    """Raised for a truncated or corrupted similarity cache file."""


class SimilarityCache:
    """Thread-safe map from an unordered article-id pair to a similarity value."""

    def __init__(self, tag: bytes = bytes(32)):
        if len(tag) != 32:
            raise ValueError("generation tag must be 32 bytes")
        self.tag = tag
        self._entries: dict[tuple[str, str], float] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return self.key(*pair) in self._entries

    def get(self, a: str, b: str) -> float | None:
        value = self._entries.get(self.key(a, b))
        with self._lock:
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
        return value

    def put(self, a: str, b: str, value: float) -> None:
        with self._lock:
            self._entries[self.key(a, b)] = value

    def items(self) -> list[tuple[tuple[str, str], float]]:
        with self._lock:
            return sorted(self._entries.items())

    def encode(self) -> bytes:
        entries = self.items()
        parts = [CACHE_MAGIC, self.tag, _U64.pack(len(entries))]
        for (a, b), v in entries:
            for ident in (a, b):
                raw = ident.encode("utf-8")
                parts += [_U16.pack(len(raw)), raw]
            parts.append(_F64.pack(v))
        return b"".join(parts)

    def save(self, path: str | Path) -> None:
        """Checkpoint to disk (atomically replaces ``path``)."""
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(self.encode())
        tmp.replace(path)

    @classmethod
    def decode(cls, data: bytes, tag: bytes) -> "SimilarityCache":
        """Parse cache bytes; entries written under another tag are discarded."""
        cache = cls(tag)
        pos = 0

        def take(n: int, what: str) -> bytes:
            nonlocal pos
            if pos + n > len(data):
                raise CacheFormatError(f"truncated cache at byte offset {pos}: expected {n} bytes for {what}")
            chunk = data[pos:pos + n]
            pos += n
            return chunk

        if take(len(CACHE_MAGIC), "header") != CACHE_MAGIC:
            raise CacheFormatError("bad header: not a TMSC1 similarity cache")
        file_tag = take(32, "generation tag")
        count = _U64.unpack(take(8, "entry count"))[0]
        if file_tag != tag:
            logger.info("similarity cache generation differs; starting cold")
            return cache
        for _ in range(count):
            ids = []
            for _side in range(2):
                n = _U16.unpack(take(2, "id length"))[0]
                try:
                    ids.append(take(n, "id bytes").decode("utf-8"))
                except UnicodeDecodeError:
                    raise CacheFormatError(f"invalid UTF-8 id before byte offset {pos}") from None
            value = _F64.unpack(take(8, "similarity value"))[0]
            if not ids[0] < ids[1] or not -1.0 <= value <= 1.0:
                raise CacheFormatError(f"invalid entry ending at byte offset {pos}")
            cache._entries[(ids[0], ids[1])] = value
        if pos != len(data):
            raise CacheFormatError(f"{len(data) - pos} trailing bytes at byte offset {pos}")
        return cache

    @classmethod
    def load(cls, path: str | Path, tag: bytes) -> "SimilarityCache":
        path = Path(path)
        if not path.exists():
            return cls(tag)
        return cls.decode(path.read_bytes(), tag)


def cached_similarity(
    cache: SimilarityCache,
    corpus: Corpus,
    a1: str,
    a2: str,
    compute: Callable[[str, str], float],
) -> float:
    """Serve a pair from ``cache`` or compute and store it.

    The diagonal is never cached. Concurrent callers may both compute the
    same missing pair; ``compute`` is pure, so either write is correct.
    """
    for a in (a1, a2):
        if a not in corpus:
            raise KeyError(f"unknown article id {a!r}")
    if a1 == a2:
        return compute(a1, a2)
    value = cache.get(a1, a2)
    if value is None:
        lo, hi = SimilarityCache.key(a1, a2)
        value = compute(lo, hi)
        cache.put(lo, hi, value)
    return value


class ArticleSimilarity:
    """Article similarity over a corpus, with memoized top terms and a pair cache.

    Instances are callable as ``sim(article_id, other_id)``.
    """

    def __init__(
        self,
        corpus: Corpus,
        index: DfIndex,
        words: WordSimilarity,
        cfg: SimilarityConfig = SimilarityConfig(),
        stopwords=DEFAULT_STOPWORDS,
        cache: SimilarityCache | None = None,
    ):
        self.corpus = corpus
        self.index = index
        self.words = words
        self.cfg = cfg
        self.stopwords = stopwords
        self.cache = cache if cache is not None else SimilarityCache()
        self.computations = 0
        self._terms: dict[str, RankedTerms] = {}
        self._lock = threading.Lock()

    def terms_for_text(self, text: str) -> RankedTerms:
        return top_tfidf(normalize(text, self.stopwords), self.index, self.cfg.k)

    def terms(self, article_id: str) -> RankedTerms:
        t = self._terms.get(article_id)
        if t is None:
            t = self.terms_for_text(self.corpus.article(article_id).text)
            self._terms[article_id] = t
        return t

    def compute(self, a1: str, a2: str) -> float:
        with self._lock:
            self.computations += 1
        return article_similarity(self.terms(a1), self.terms(a2), self.words, self.cfg)

    def __call__(self, a1: str, a2: str) -> float:
        return cached_similarity(self.cache, self.corpus, a1, a2, self.compute)
