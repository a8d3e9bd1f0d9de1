"""Find trivia-worthy categories of an article.

A category is good trivia for an article when the category is cohesive (its
members resemble each other) and the article is surprising in it (it
resembles the members less than they resemble each other). Article
resemblance is a weighted best-match between the articles' top TF-IDF terms
under word-embedding similarity.
"""

from .corpus import Article, Category, Corpus, CorpusError, load_corpus, split_paragraphs
from .embeddings import (
    EmbeddingFormatError,
    EmbeddingStore,
    StemmedVocabulary,
    load_embeddings,
    load_word2vec_binary,
    load_word2vec_text,
    write_store,
)
from .engine import (
    CategoryScore,
    EngineConfig,
    ScoringError,
    TriviaEngine,
    explain_category,
    sample_members,
)
from .similarity import (
    ArticleSimilarity,
    SimilarityCache,
    SimilarityConfig,
    article_similarity,
    cached_similarity,
    generation_tag,
)
from .textnorm import load_stopwords, normalize
from .tfidf import DfIndex, RankedTerms, SurfaceLexicon, build_df_index, read_df_index, top_tfidf, write_df_index

__version__ = "0.1.0"
