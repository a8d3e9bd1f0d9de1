"""Trivia scoring: surprise, cohesiveness and their product per category.

All functions take the article similarity as a plain callable
``sim(article_id, other_id) -> float`` so they can run against the real
embedding pipeline or a stub similarity table alike.
"""

from __future__ import annotations

import hashlib
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .corpus import Category, Corpus
from .similarity import ArticleSimilarity, article_similarity
from .tfidf import top_tfidf
from .textnorm import normalize

logger = logging.getLogger(__name__)

Similarity = Callable[[str, str], float]

INF = math.inf


class ScoringError(ValueError):
    """Raised when a category or article cannot be scored."""


@dataclass(frozen=True)
class EngineConfig:
    sample_cap: int = 50
    rng_seed: int = 0
    min_category_size: int = 2
    trivia_threshold: float | None = None

    def __post_init__(self) -> None:
        if self.sample_cap < 2:
            raise ValueError("sample_cap must be >= 2")
        if self.min_category_size < 2:
            raise ValueError("min_category_size must be >= 2")


@dataclass(frozen=True)
class CategoryScore:
    category: str
    surprise: float
    cohesiveness: float
    trivia: float
    sampled: bool
    sample_size: int
    similarity_to_category: float

    @property
    def flagged(self) -> bool:
        """True when the article's mean similarity to the category is not positive."""
        return math.isinf(self.surprise)

    def to_record(self) -> dict:
        def enc(x: float):
            return "inf" if x == INF else x

        return {
            "category": self.category,
            "surprise": enc(self.surprise),
            "cohesiveness": self.cohesiveness,
            "trivia": enc(self.trivia),
            "sampled": self.sampled,
            "sample_size": self.sample_size,
        }


def _category_seed(seed: int, name: str) -> int:
    h = hashlib.sha256(f"{seed}\0{name}".encode("utf-8")).digest()
    return int.from_bytes(h[:8], "little")


def sample_members(
    members: Sequence[str],
    cap: int,
    seed: int,
    target: str | None = None,
    name: str = "",
) -> list[str]:
    """Pick at most ``cap`` members, always keeping ``target``.

    The draw depends only on ``(seed, name, members, target)``, never on call
    order, and the result keeps the original member order.
    """
    if cap < 2:
        raise ValueError("cap must be >= 2")
    members = list(members)
    if len(members) <= cap:
        return members
    rng = random.Random(_category_seed(seed, name))
    if target is None:
        chosen = set(rng.sample(range(len(members)), cap))
    else:
        pool = [i for i, m in enumerate(members) if m != target]
        chosen = set(rng.sample(pool, cap - 1))
        chosen.add(members.index(target))
    return [m for i, m in enumerate(members) if i in chosen]


def mean_similarity_to(article_id: str, members: Iterable[str], sim: Similarity) -> float:
    total = 0.0
    count = 0
    for other in members:
        if other == article_id:
            continue
        total += sim(article_id, other)
        count += 1
    if count == 0:
        raise ScoringError(f"no other members to compare {article_id!r} with")
    return total / count


def mean_pairwise_similarity(members: Sequence[str], sim: Similarity) -> float:
    n = len(members)
    if n < 2:
        raise ScoringError("cohesiveness needs at least two members")
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += sim(members[i], members[j])
    return total / (n * (n - 1) // 2)


def surprise_from_similarity(s: float) -> float:
    return 1.0 / s if s > 0 else INF


class TriviaEngine:
    """Scores an article's categories against a corpus."""

    def __init__(self, corpus: Corpus, sim: Similarity, config: EngineConfig = EngineConfig()):
        self.corpus = corpus
        self.sim = sim
        self.config = config

    def _category(self, category: str | Category) -> Category:
        if isinstance(category, Category):
            return category
        return self.corpus.category(category)

    def _sample(self, cat: Category, target: str | None) -> list[str]:
        return sample_members(cat.members, self.config.sample_cap, self.config.rng_seed, target, cat.name)

    def _check_member(self, article_id: str, cat: Category) -> None:
        if article_id not in cat:
            raise ScoringError(f"article {article_id!r} is not in category {cat.name!r}")
        if cat.size < 2:
            raise ScoringError(f"category {cat.name!r} has a single member")

    def surprise(self, article_id: str, category: str | Category) -> tuple[float, float]:
        """Return ``(surprise, mean similarity of the article to the category)``."""
        cat = self._category(category)
        self._check_member(article_id, cat)
        s = mean_similarity_to(article_id, self._sample(cat, article_id), self.sim)
        return surprise_from_similarity(s), s

    def cohesiveness(self, category: str | Category, target: str | None = None) -> float:
        cat = self._category(category)
        if cat.size < 2:
            raise ScoringError(f"category {cat.name!r} has a single member")
        return mean_pairwise_similarity(self._sample(cat, target), self.sim)

    def trivia_score(self, article_id: str, category: str | Category) -> CategoryScore:
        cat = self._category(category)
        self._check_member(article_id, cat)
        members = self._sample(cat, article_id)
        s = mean_similarity_to(article_id, members, self.sim)
        coh = mean_pairwise_similarity(members, self.sim)
        surp = surprise_from_similarity(s)
        trivia = coh / s if s > 0 else INF
        return CategoryScore(cat.name, surp, coh, trivia, len(members) < cat.size, len(members), s)

    def scorable_categories(self, article_id: str) -> list[Category]:
        article = self.corpus.article(article_id)
        out = []
        for name in article.categories:
            cat = self.corpus.categories.get(name)
            if cat is None:
                continue
            if cat.size < self.config.min_category_size:
                logger.warning("skipping category %r: %d member(s)", name, cat.size)
                continue
            out.append(cat)
        return out

    def top_trivia(self, article_id: str, workers: int = 1) -> list[CategoryScore]:
        """Score every eligible category of the article, best trivia first.

        Flagged categories (non-positive similarity to the article) sort last.
        The result does not depend on ``workers``.
        """
        cats = self.scorable_categories(article_id)
        if not cats:
            logger.warning("article %r has no category with >= %d members",
                           article_id, self.config.min_category_size)
            return []
        score = lambda c: self.trivia_score(article_id, c)  # noqa: E731
        if workers > 1 and len(cats) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                scores = list(pool.map(score, cats))
        else:
            scores = [score(c) for c in cats]
        return rank_scores(scores, self.config.trivia_threshold)

    def top_trivia_many(self, article_ids: Sequence[str], workers: int = 1) -> dict[str, list[CategoryScore]]:
        if workers > 1 and len(article_ids) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(self.top_trivia, article_ids))
        else:
            results = [self.top_trivia(a) for a in article_ids]
        return dict(zip(article_ids, results))

    def rank_members_by_surprise(self, category: str | Category, workers: int = 1) -> list[tuple[str, float]]:
        """Members ordered from most to least surprising; the last one is the exemplar."""
        cat = self._category(category)
        if cat.size < 2:
            raise ScoringError(f"category {cat.name!r} has a single member")

        def one(a: str) -> tuple[str, float]:
            return a, self.surprise(a, cat)[0]

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                ranked = list(pool.map(one, cat.members))
        else:
            ranked = [one(a) for a in cat.members]
        ranked.sort(key=lambda item: (-item[1], item[0]))
        return ranked


def rank_scores(scores: Iterable[CategoryScore], threshold: float | None = None) -> list[CategoryScore]:
    ranked = sorted(scores, key=lambda s: (s.flagged, -s.trivia, s.category))
    if threshold is not None:
        ranked = [s for s in ranked if s.trivia >= threshold]
    return ranked


def explain_category(model: ArticleSimilarity, article_id: str, category: str) -> tuple[int, float]:
    """Find the paragraph of an article that best matches a category title.

    The title and each paragraph are reduced to top TF-IDF terms and compared
    with the article similarity measure. Ties go to the earlier paragraph.
    """
    article = model.corpus.article(article_id)
    if not article.paragraphs:
        raise ScoringError(f"article {article_id!r} has no paragraphs")
    k = model.cfg.k
    title_terms = top_tfidf(normalize(category, model.stopwords), model.index, k)

    best: tuple[int, float] | None = None
    for i, para in enumerate(article.paragraphs):
        terms = top_tfidf(normalize(para, model.stopwords), model.index, k)
        if not any(t in model.words for t in terms.words):
            continue
        score = article_similarity(title_terms, terms, model.words, model.cfg)
        if best is None or score > best[1]:
            best = (i, score)
    if best is None:
        raise ScoringError("no explainable paragraph")
    return best
