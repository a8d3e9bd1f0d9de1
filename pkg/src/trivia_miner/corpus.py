"""Article/category corpus loaded from a JSON Lines snapshot.

Each line of the snapshot is one article::

    {"id": "obama", "title": "Barack Obama", "text": "...", "categories": ["..."]}

Unknown fields are ignored. The loaded :class:`Corpus` keeps both directions
of the membership relation (article -> categories, category -> members) and
is immutable after construction, so it can be shared freely between worker
threads.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

_PARAGRAPH_BREAK = re.compile(r"\n[ \t\r\f\v]*\n\s*")


class CorpusError(ValueError):
    """Raised when a corpus snapshot is malformed or inconsistent."""


def split_paragraphs(text: str) -> list[str]:
    """Split ``text`` on blank lines, trimming each segment and dropping empties.

    A single newline is not a boundary; two or more consecutive newlines
    (optionally separated by horizontal whitespace) are.
    """
    return [p.strip() for p in _PARAGRAPH_BREAK.split(text) if p.strip()]


@dataclass(frozen=True)
class Article:
    id: str
    title: str
    text: str
    categories: tuple[str, ...] = ()
    paragraphs: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.paragraphs is None:
            object.__setattr__(self, "paragraphs", tuple(split_paragraphs(self.text)))
        if len(set(self.categories)) != len(self.categories):
            raise CorpusError(f"article {self.id!r} lists a category more than once")


@dataclass(frozen=True)
class Category:
    name: str
    members: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_singleton(self) -> bool:
        return len(self.members) < 2

    def __contains__(self, article_id: object) -> bool:
        return article_id in self.members


@dataclass(frozen=True)
class Corpus:
    """In-memory article and category index.

    ``articles`` preserves input order. Category member tuples follow article
    order, which keeps every downstream summation order deterministic.
    """

    articles: Mapping[str, Article]
    categories: Mapping[str, Category]
    digest: str
    warnings: tuple[str, ...] = ()

    @property
    def n_docs(self) -> int:
        return len(self.articles)

    def __len__(self) -> int:
        return len(self.articles)

    def __iter__(self):
        return iter(self.articles.values())

    def __contains__(self, article_id: object) -> bool:
        return article_id in self.articles

    def article(self, article_id: str) -> Article:
        try:
            return self.articles[article_id]
        except KeyError:
            raise KeyError(f"unknown article id {article_id!r}") from None

    def category(self, name: str) -> Category:
        try:
            return self.categories[name]
        except KeyError:
            raise KeyError(f"unknown category {name!r}") from None

    def singleton_categories(self) -> list[str]:
        return [name for name, c in self.categories.items() if c.is_singleton]

    @classmethod
    def from_articles(cls, articles: Iterable[Article]) -> "Corpus":
        """Build a corpus, checking id uniqueness and deriving the category index."""
        by_id: dict[str, Article] = {}
        for art in articles:
            if art.id in by_id:
                raise CorpusError(f"duplicate article id {art.id!r}")
            by_id[art.id] = art

        warnings: list[str] = []
        members: dict[str, list[str]] = {}
        for art in by_id.values():
            for name in art.categories:
                members.setdefault(name, []).append(art.id)

        categories: dict[str, Category] = {}
        for name, ids in members.items():
            resolvable = [i for i in ids if i in by_id]
            if not name.strip() or not resolvable:
                msg = f"dropping category {name!r}: no resolvable members"
                logger.warning(msg)
                warnings.append(msg)
                continue
            categories[name] = Category(name, tuple(resolvable))

        if warnings:
            # keep the bidirectional index exact after dropping categories
            by_id = {
                i: _with_categories(a, tuple(c for c in a.categories if c in categories))
                for i, a in by_id.items()
            }

        return cls(by_id, categories, _content_digest(by_id.values()), tuple(warnings))


def _with_categories(article: Article, categories: tuple[str, ...]) -> Article:
    if categories == article.categories:
        return article
    return Article(article.id, article.title, article.text, categories, article.paragraphs)


def _content_digest(articles: Iterable[Article]) -> str:
    h = hashlib.sha256()
    for a in articles:
        record = json.dumps(
            [a.id, a.title, a.text, list(a.categories)], ensure_ascii=False, separators=(",", ":")
        )
        h.update(record.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def _parse_line(line: str, lineno: int) -> Article:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")

    art_id = obj.get("id")
    if not isinstance(art_id, str) or not art_id:
        raise CorpusError(f"line {lineno}: 'id' must be a non-empty string")
    title = obj.get("title", "")
    text = obj.get("text", "")
    cats = obj.get("categories", [])
    if not isinstance(title, str) or not isinstance(text, str):
        raise CorpusError(f"line {lineno}: 'title' and 'text' must be strings")
    if not isinstance(cats, list) or not all(isinstance(c, str) for c in cats):
        raise CorpusError(f"line {lineno}: 'categories' must be an array of strings")

    unique = tuple(dict.fromkeys(cats))
    if len(unique) != len(cats):
        logger.warning("line %d: duplicate categories in article %r collapsed", lineno, art_id)
    return Article(art_id, title, text, unique)


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a JSONL corpus snapshot.

    Raises:
        CorpusError: on a malformed line (the message names the line number)
            or a duplicate article id (the message names the id).
    """
    path = Path(path)
    articles: list[Article] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            art = _parse_line(line, lineno)
            if art.id in seen:
                raise CorpusError(f"line {lineno}: duplicate article id {art.id!r}")
            seen.add(art.id)
            articles.append(art)

    corpus = Corpus.from_articles(articles)
    singles = corpus.singleton_categories()
    if singles:
        logger.info("%d singleton categories will be skipped when scoring", len(singles))
    return corpus


def write_corpus(corpus: Corpus | Iterable[Article], path: str | Path) -> None:
    """Write articles back out in the JSONL snapshot format."""
    items = corpus.articles.values() if isinstance(corpus, Corpus) else corpus
    with Path(path).open("w", encoding="utf-8") as fh:
        for a in items:
            rec = {"id": a.id, "title": a.title, "text": a.text, "categories": list(a.categories)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
