"""Command-line front end.

Exit codes: 0 success, 2 input/IO error, 3 lookup error, 4 configuration error.
"""

from __future__ import annotations

import argparse
import difflib
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Corpus, CorpusError, load_corpus
from .embeddings import EmbeddingFormatError, StemmedVocabulary, load_embeddings
from .engine import EngineConfig, ScoringError, TriviaEngine, explain_category
from .similarity import (
    WEIGHTING_SCHEME,
    ArticleSimilarity,
    CacheFormatError,
    SimilarityCache,
    SimilarityConfig,
    generation_tag,
)
from .textnorm import DEFAULT_STOPWORDS, load_stopwords
from .tfidf import DfIndexFormatError, SurfaceLexicon, build_df_index, read_df_index, write_df_index

logger = logging.getLogger("trivia_miner")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_LOOKUP = 3
EXIT_CONFIG = 4

CACHE_ENV = "TRIVIA_MINER_CACHE"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    corpus_path: Path
    idf_corpus_path: Path
    embeddings_path: Path | None
    embeddings_format: str | None
    index_path: Path | None
    stopwords_path: Path | None
    k: int
    min_df: int
    sample_cap: int
    seed: int
    workers: int
    cache_path: Path | None
    threshold: float | None
    output: str

    @classmethod
    def from_args(cls, args: argparse.Namespace, needs_embeddings: bool) -> "RunConfig":
        if args.k < 1:
            raise CliError("--k must be >= 1", EXIT_CONFIG)
        if args.sample_cap < 2:
            raise CliError("--sample-cap must be >= 2", EXIT_CONFIG)
        if args.workers < 1:
            raise CliError("--workers must be >= 1", EXIT_CONFIG)
        if args.min_df < 0:
            raise CliError("--min-df must be >= 0", EXIT_CONFIG)
        if needs_embeddings and not args.embeddings:
            raise CliError("--embeddings is required for this command", EXIT_CONFIG)

        cache = os.environ.get(CACHE_ENV) or args.cache
        cfg = cls(
            corpus_path=Path(args.corpus),
            idf_corpus_path=Path(args.idf_corpus or args.corpus),
            embeddings_path=Path(args.embeddings) if args.embeddings else None,
            embeddings_format=args.embeddings_format,
            index_path=Path(args.index) if args.index else None,
            stopwords_path=Path(args.stopwords) if args.stopwords else None,
            k=args.k,
            min_df=args.min_df,
            sample_cap=args.sample_cap,
            seed=args.seed,
            workers=args.workers,
            cache_path=Path(cache) if cache else None,
            threshold=args.threshold,
            output=args.output,
        )
        inputs = [cfg.corpus_path, cfg.idf_corpus_path, cfg.stopwords_path]
        if needs_embeddings:
            inputs += [cfg.embeddings_path, cfg.index_path]
        for p in inputs:
            if p is not None:
                _check_readable(p)
        return cfg


def _check_readable(path: Path) -> None:
    if not path.is_file() or not os.access(path, os.R_OK):
        raise CliError(f"cannot read {path}", EXIT_INPUT)


def _load_corpus(path: Path) -> Corpus:
    try:
        return load_corpus(path)
    except (OSError, CorpusError, UnicodeDecodeError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None


def _stopwords(cfg: RunConfig):
    if cfg.stopwords_path is None:
        return DEFAULT_STOPWORDS
    try:
        return load_stopwords(cfg.stopwords_path)
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"{cfg.stopwords_path}: {exc}", EXIT_INPUT) from None


def _stopwords_digest(stopwords) -> str:
    return hashlib.sha256("\n".join(sorted(stopwords)).encode("utf-8")).hexdigest()


class Session:
    """Everything a scoring command needs, loaded once."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        stopwords = _stopwords(cfg)
        self.corpus = _load_corpus(cfg.corpus_path)
        idf_corpus = (
            self.corpus if cfg.idf_corpus_path == cfg.corpus_path else _load_corpus(cfg.idf_corpus_path)
        )
        lexicon = SurfaceLexicon()
        try:
            built = build_df_index(idf_corpus, cfg.min_df, stopwords, lexicon)
        except ValueError as exc:
            raise CliError(f"{cfg.idf_corpus_path}: {exc}", EXIT_INPUT) from None
        if cfg.index_path is not None:
            try:
                index = read_df_index(cfg.index_path)
            except (OSError, DfIndexFormatError) as exc:
                raise CliError(f"{cfg.index_path}: {exc}", EXIT_INPUT) from None
        else:
            index = built
        try:
            store = load_embeddings(cfg.embeddings_path, cfg.embeddings_format)
        except (OSError, EmbeddingFormatError, UnicodeDecodeError) as exc:
            raise CliError(f"{cfg.embeddings_path}: {exc}", EXIT_INPUT) from None

        tag = generation_tag(
            self.corpus.digest, store.digest(), cfg.k, WEIGHTING_SCHEME,
            index.digest(), _stopwords_digest(stopwords),
        )
        cache = SimilarityCache(tag)
        if cfg.cache_path is not None:
            try:
                cache = SimilarityCache.load(cfg.cache_path, tag)
            except (OSError, CacheFormatError) as exc:
                raise CliError(f"{cfg.cache_path}: {exc}", EXIT_INPUT) from None

        self.model = ArticleSimilarity(
            self.corpus, index, StemmedVocabulary(store, lexicon), SimilarityConfig(cfg.k), stopwords, cache
        )
        self.engine = TriviaEngine(
            self.corpus,
            self.model,
            EngineConfig(sample_cap=cfg.sample_cap, rng_seed=cfg.seed, trivia_threshold=cfg.threshold),
        )

    def checkpoint(self) -> None:
        if self.cfg.cache_path is not None:
            self.model.cache.save(self.cfg.cache_path)

    def require_article(self, article_id: str) -> None:
        if article_id in self.corpus:
            return
        titles = {a.title: a.id for a in self.corpus}
        near = difflib.get_close_matches(article_id, list(titles) + list(self.corpus.articles), n=5, cutoff=0.4)
        hint = f"; nearest matches: {', '.join(near)}" if near else ""
        raise CliError(f"unknown article id {article_id!r}{hint}", EXIT_LOOKUP)

    def require_category(self, name: str) -> None:
        if name in self.corpus.categories:
            return
        near = difflib.get_close_matches(name, list(self.corpus.categories), n=5, cutoff=0.4)
        hint = f"; nearest matches: {', '.join(near)}" if near else ""
        raise CliError(f"unknown category {name!r}{hint}", EXIT_LOOKUP)


def _fmt(x) -> str:
    if isinstance(x, float):
        return "inf" if x == float("inf") else f"{x:.6f}"
    return str(x)


def _emit(records: list[dict], output: str, out) -> None:
    if output == "jsonl":
        for r in records:
            out.write(json.dumps(r, ensure_ascii=False) + "\n")
        return
    if not records:
        return
    cols = list(records[0])
    rows = [[_fmt(r[c]) for c in cols] for r in records]
    widths = [max(len(c), *(len(row[i]) for row in rows)) for i, c in enumerate(cols)]
    out.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
    for row in rows:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def cmd_build_index(args, out) -> int:
    cfg = RunConfig.from_args(args, needs_embeddings=False)
    if cfg.index_path is None:
        raise CliError("--index (output path) is required for build-index", EXIT_CONFIG)
    corpus = _load_corpus(cfg.idf_corpus_path)
    try:
        index = build_df_index(corpus, cfg.min_df, _stopwords(cfg))
    except ValueError as exc:
        raise CliError(f"{cfg.idf_corpus_path}: {exc}", EXIT_INPUT) from None
    if not index.df:
        logger.warning("min_df=%d removed every term; the index is empty", cfg.min_df)
    try:
        write_df_index(index, cfg.index_path)
    except OSError as exc:
        raise CliError(f"{cfg.index_path}: {exc}", EXIT_INPUT) from None
    out.write(f"terms={len(index)} n_docs={index.n_docs}\n")
    return EXIT_OK


def cmd_top_trivia(args, out) -> int:
    s = Session(RunConfig.from_args(args, needs_embeddings=True))
    s.require_article(args.article_id)
    scores = s.engine.top_trivia(args.article_id, workers=s.cfg.workers)
    s.checkpoint()
    _emit([sc.to_record() for sc in scores], s.cfg.output, out)
    return EXIT_OK


def cmd_similarity(args, out) -> int:
    s = Session(RunConfig.from_args(args, needs_embeddings=True))
    s.require_article(args.id1)
    s.require_article(args.id2)
    value = s.model(args.id1, args.id2)
    s.checkpoint()
    out.write(f"{value:.6f}\n")
    return EXIT_OK


def cmd_outliers(args, out) -> int:
    s = Session(RunConfig.from_args(args, needs_embeddings=True))
    s.require_category(args.category)
    ranked = s.engine.rank_members_by_surprise(args.category, workers=s.cfg.workers)
    s.checkpoint()
    records = [
        {"article": a, "title": s.corpus.article(a).title, "surprise": "inf" if v == float("inf") else v}
        for a, v in ranked
    ]
    _emit(records, s.cfg.output, out)
    return EXIT_OK


def cmd_explain(args, out) -> int:
    s = Session(RunConfig.from_args(args, needs_embeddings=True))
    s.require_article(args.article_id)
    s.require_category(args.category)
    idx, score = explain_category(s.model, args.article_id, args.category)
    record = {
        "article": args.article_id,
        "category": args.category,
        "paragraph": idx,
        "score": score,
        "text": s.corpus.article(args.article_id).paragraphs[idx],
    }
    _emit([record], s.cfg.output, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus", required=True, help="JSONL corpus snapshot")
    common.add_argument("--idf-corpus", help="JSONL corpus for document frequencies (default: --corpus)")
    common.add_argument("--embeddings", help="word2vec vectors file")
    common.add_argument("--embeddings-format", choices=["text", "binary"],
                        help="default: binary for *.bin, text otherwise")
    common.add_argument("--index", help="DfIndex file (output of build-index; input elsewhere)")
    common.add_argument("--stopwords", help="stopword file replacing the bundled list")
    common.add_argument("--k", type=int, default=10, help="top TF-IDF terms per article (default 10)")
    common.add_argument("--min-df", type=int, default=10, help="prune terms in fewer documents (default 10)")
    common.add_argument("--sample-cap", type=int, default=50, help="max members sampled per category (default 50)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--cache", help=f"similarity cache file (env {CACHE_ENV} overrides)")
    common.add_argument("--threshold", type=float, help="drop categories with trivia below this")
    common.add_argument("--output", choices=["jsonl", "table"], default="jsonl")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="trivia-miner", description="Rank an article's categories by trivia-worthiness.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-index", parents=[common], help="build and save the document-frequency index")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("top-trivia", parents=[common], help="rank the categories of one article")
    p.add_argument("article_id")
    p.set_defaults(func=cmd_top_trivia)

    p = sub.add_parser("similarity", parents=[common], help="similarity between two articles")
    p.add_argument("id1")
    p.add_argument("id2")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("outliers", parents=[common], help="rank a category's members by surprise")
    p.add_argument("category")
    p.set_defaults(func=cmd_outliers)

    p = sub.add_parser("explain", parents=[common], help="paragraph of an article that best fits a category")
    p.add_argument("article_id")
    p.add_argument("category")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"trivia-miner: {exc}", file=sys.stderr)
        return exc.code
    except ScoringError as exc:
        print(f"trivia-miner: {exc}", file=sys.stderr)
        return EXIT_LOOKUP


if __name__ == "__main__":
    sys.exit(main())
