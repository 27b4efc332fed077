"""hopchain: two-hop explanation chain retrieval over a declarative fact
corpus, combining BM25 keyword search, exact inner-product dense retrieval
with a learned query re-encoder, hybrid candidate merging, and score-based
re-ranking."""

from .chains import ChainCandidate, PipelineConfig, merge_candidates, semantic_chains, syntactic_chains
from .corpus import (
    DEFAULT_STOPWORDS,
    Corpus,
    Fact,
    QAPair,
    Tokenizer,
    load_corpus,
    overlaps,
    tokenize,
)
from .dense import DenseIndex, load_embeddings, mips_top_k, save_embeddings
from .evaluation import EvalReport, GoldChain, compare_runs, gold_retrieval_rate
from .lexical import Bm25Params, InvertedIndex, ScoredFact, build_index, query, query_constrained
from .reencoder import ChainTripleBatch, ReEncoderModel, TrainConfig, gradient_check, reencode, train
from .rerank import ScoreTable, baseline_scores, build_rerank_dataset, rerank

__version__ = "0.1.0"

__all__ = [
    "Bm25Params",
    "ChainCandidate",
    "ChainTripleBatch",
    "Corpus",
    "DEFAULT_STOPWORDS",
    "DenseIndex",
    "EvalReport",
    "Fact",
    "GoldChain",
    "InvertedIndex",
    "PipelineConfig",
    "QAPair",
    "ReEncoderModel",
    "ScoreTable",
    "ScoredFact",
    "Tokenizer",
    "TrainConfig",
    "baseline_scores",
    "build_index",
    "build_rerank_dataset",
    "compare_runs",
    "gold_retrieval_rate",
    "gradient_check",
    "load_corpus",
    "load_embeddings",
    "merge_candidates",
    "mips_top_k",
    "overlaps",
    "query",
    "query_constrained",
    "reencode",
    "rerank",
    "save_embeddings",
    "semantic_chains",
    "syntactic_chains",
    "tokenize",
    "train",
]
