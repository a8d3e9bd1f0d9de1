"""Word vectors in word2vec text/binary format and word-level similarity.

Components are kept exactly as read (float32) together with float64 row
norms; similarities are computed on float64 unit vectors. Every dot product,
single or batched, is an elementwise product followed by ``np.sum`` over the
contiguous vector axis, so ``word_similarity(a, b)`` and the corresponding
entry of ``similarity_matrix`` are the same float, bit for bit.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from .tfidf import SurfaceLexicon

logger = logging.getLogger(__name__)

_F32_LE = np.dtype("<f4")


class EmbeddingFormatError(ValueError):
    """Raised for malformed, truncated or degenerate embedding files."""


class EmbeddingStore:
    """Immutable term -> vector table with cosine word similarity."""

    unit_normalized = True

    def __init__(self, terms: Sequence[str], raw: np.ndarray, source_digest: str | None = None):
        raw = np.ascontiguousarray(raw, dtype=np.float32)
        if raw.ndim != 2 or raw.shape[0] != len(terms):
            raise ValueError("raw must be a (len(terms), dim) array")
        if not np.all(np.isfinite(raw)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(raw), axis=1))[0])
            raise EmbeddingFormatError(f"non-finite component in vector for {terms[bad]!r}")
        norms = np.sqrt(np.sum(raw.astype(np.float64) ** 2, axis=1))
        if np.any(norms == 0.0):
            bad = int(np.flatnonzero(norms == 0.0)[0])
            raise EmbeddingFormatError(f"zero-norm vector for term {terms[bad]!r}")

        self.terms = tuple(terms)
        self.index = {}
        for i, t in enumerate(self.terms):
            if t in self.index:
                raise EmbeddingFormatError(f"duplicate term {t!r}")
            self.index[t] = i
        self.raw = raw
        self.raw.setflags(write=False)
        self.norms = norms
        self.dim = raw.shape[1]
        self._source_digest = source_digest

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: object) -> bool:
        return term in self.index

    def row(self, term: str) -> int | None:
        return self.index.get(term)

    def unit_rows(self, rows: Sequence[int]) -> np.ndarray:
        idx = np.asarray(rows, dtype=np.intp)
        return self.raw[idx].astype(np.float64) / self.norms[idx, None]

    def vector(self, term: str) -> np.ndarray:
        return self.unit_rows([self.index[term]])[0]

    def dot_rows(self, i: int, j: int) -> float:
        u, v = self.unit_rows([i, j])
        return min(1.0, max(-1.0, float(np.sum(u * v))))

    def rows_matrix(self, rows1: Sequence[int], rows2: Sequence[int]) -> np.ndarray:
        a = self.unit_rows(rows1)
        b = self.unit_rows(rows2)
        return np.clip(np.sum(a[:, None, :] * b[None, :, :], axis=-1), -1.0, 1.0)

    def word_similarity(self, w1: str, w2: str) -> float | None:
        """Cosine similarity of two terms, or None if either is out of vocabulary."""
        i, j = self.index.get(w1), self.index.get(w2)
        if i is None or j is None:
            return None
        return self.dot_rows(i, j)

    def similarity_matrix(self, terms1: Sequence[str], terms2: Sequence[str]) -> np.ndarray:
        return _matrix_via_rows(self, [self.row(t) for t in terms1], [self.row(t) for t in terms2])

    def digest(self) -> str:
        if self._source_digest is None:
            self._source_digest = hashlib.sha256(encode_binary(self)).hexdigest()
        return self._source_digest


def _matrix_via_rows(store: EmbeddingStore, rows1, rows2) -> np.ndarray:
    out = np.full((len(rows1), len(rows2)), np.nan)
    i_ok = [i for i, r in enumerate(rows1) if r is not None]
    j_ok = [j for j, r in enumerate(rows2) if r is not None]
    if i_ok and j_ok:
        block = store.rows_matrix([rows1[i] for i in i_ok], [rows2[j] for j in j_ok])
        out[np.ix_(i_ok, j_ok)] = block
    return out


class StemmedVocabulary:
    """Resolve stemmed terms to embedding rows.

    A term is looked up as-is first; failing that, its surface forms from the
    lexicon are tried, most frequent first, and the first one in the
    vocabulary wins.
    """

    def __init__(self, store: EmbeddingStore, lexicon: SurfaceLexicon | None = None):
        self.store = store
        self.lexicon = lexicon or SurfaceLexicon()
        self._resolved: dict[str, int | None] = {}

    def row(self, term: str) -> int | None:
        try:
            return self._resolved[term]
        except KeyError:
            pass
        r = self.store.row(term)
        if r is None:
            for surface in self.lexicon.surfaces(term):
                r = self.store.row(surface)
                if r is not None:
                    break
        self._resolved[term] = r
        return r

    def __contains__(self, term: object) -> bool:
        return isinstance(term, str) and self.row(term) is not None

    def word_similarity(self, w1: str, w2: str) -> float | None:
        i, j = self.row(w1), self.row(w2)
        if i is None or j is None:
            return None
        return self.store.dot_rows(i, j)

    def similarity_matrix(self, terms1: Sequence[str], terms2: Sequence[str]) -> np.ndarray:
        return _matrix_via_rows(self.store, [self.row(t) for t in terms1], [self.row(t) for t in terms2])


def _file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_header(line: bytes | str, where: str) -> tuple[int, int]:
    if isinstance(line, bytes):
        line = line.decode("ascii", errors="replace")
    parts = line.split()
    try:
        vocab, dim = (int(p) for p in parts)
    except ValueError:
        raise EmbeddingFormatError(f"{where}: header must be '<vocab_size> <dim>', got {line.strip()!r}") from None
    if vocab < 0 or dim < 1:
        raise EmbeddingFormatError(f"{where}: invalid header values {vocab} {dim}")
    return vocab, dim


def load_word2vec_text(path: str | Path) -> EmbeddingStore:
    """Parse the word2vec text format (header line, then one term per line)."""
    path = Path(path)
    terms: list[str] = []
    with path.open(encoding="utf-8") as fh:
        vocab, dim = _parse_header(fh.readline(), "line 1")
        raw = np.empty((vocab, dim), dtype=np.float32)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            if len(terms) == vocab:
                raise EmbeddingFormatError(f"line {lineno}: more entries than the header's {vocab}")
            parts = line.rstrip("\n").rstrip().split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"line {lineno}: expected {dim} components, found {len(parts) - 1}"
                )
            try:
                raw[len(terms)] = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"line {lineno}: non-numeric component") from None
            terms.append(parts[0])
    if len(terms) != vocab:
        raise EmbeddingFormatError(f"header declares {vocab} entries but file has {len(terms)}")
    return EmbeddingStore(terms, raw, _file_digest(path))


def load_word2vec_binary(path: str | Path) -> EmbeddingStore:
    """Parse the word2vec binary format (little-endian float32 components)."""
    path = Path(path)
    data = path.read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise EmbeddingFormatError("truncated file at byte offset 0: missing header line")
    vocab, dim = _parse_header(data[:nl], "header")
    pos = nl + 1
    width = 4 * dim
    terms: list[str] = []
    raw = np.empty((vocab, dim), dtype=np.float32)
    for n in range(vocab):
        while pos < len(data) and data[pos] == 0x0A:
            pos += 1
        sp = data.find(b" ", pos)
        if sp < 0:
            raise EmbeddingFormatError(f"truncated file at byte offset {pos}: entry {n} has no term terminator")
        try:
            term = data[pos:sp].decode("utf-8")
        except UnicodeDecodeError:
            raise EmbeddingFormatError(f"invalid UTF-8 term at byte offset {pos}") from None
        if not term:
            raise EmbeddingFormatError(f"empty term at byte offset {pos}")
        start = sp + 1
        if start + width > len(data):
            raise EmbeddingFormatError(
                f"truncated file at byte offset {start}: vector for {term!r} needs {width} bytes, "
                f"{len(data) - start} remain"
            )
        raw[n] = np.frombuffer(data, dtype=_F32_LE, count=dim, offset=start)
        terms.append(term)
        pos = start + width
    rest = data[pos:]
    if rest.strip(b"\n"):
        raise EmbeddingFormatError(f"{len(rest)} unexpected bytes after {vocab} entries at byte offset {pos}")
    return EmbeddingStore(terms, raw, hashlib.sha256(data).hexdigest())


def encode_binary(store: EmbeddingStore) -> bytes:
    parts = [f"{len(store)} {store.dim}\n".encode("ascii")]
    for term, vec in zip(store.terms, store.raw):
        parts.append(term.encode("utf-8") + b" " + vec.astype(_F32_LE).tobytes() + b"\n")
    return b"".join(parts)


def encode_text(store: EmbeddingStore) -> str:
    lines = [f"{len(store)} {store.dim}"]
    for term, vec in zip(store.terms, store.raw):
        # repr of a float32 widened to float64 is exact, so text round-trips too
        lines.append(term + " " + " ".join(repr(float(x)) for x in vec))
    return "\n".join(lines) + "\n"


def write_store(store: EmbeddingStore, path: str | Path, binary: bool = True) -> None:
    """Write ``store`` in word2vec binary (default) or text format."""
    if binary:
        Path(path).write_bytes(encode_binary(store))
    else:
        Path(path).write_text(encode_text(store), encoding="utf-8")


def load_embeddings(path: str | Path, fmt: str | None = None) -> EmbeddingStore:
    """Load either format; with no ``fmt``, ``.bin`` files are treated as binary."""
    path = Path(path)
    if fmt is None:
        fmt = "binary" if path.suffix == ".bin" else "text"
    if fmt == "binary":
        return load_word2vec_binary(path)
    if fmt == "text":
        return load_word2vec_text(path)
    raise ValueError(f"unknown embeddings format {fmt!r}")
