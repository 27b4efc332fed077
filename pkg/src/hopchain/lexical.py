"""Inverted index with Okapi BM25 scoring and constrained second-hop queries.

Stands in for the search engine used to mine candidate facts: `query`
retrieves the hop-1 candidates, `query_constrained` enforces the rule that
a hop-2 fact must share a token with the question-answer pair and with the
first fact.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .corpus import DEFAULT_TOKENIZER, Corpus, Tokenizer
from .errors import ConfigError, FormatError
from .fileio import atomic_write_text
from .kernels import bm25_accumulate

INDEX_MAGIC = "#hopchain-index v1"


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ConfigError(f"k1 must be >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError(f"b must be in [0,1], got {self.b}")


@dataclass(frozen=True)
class ScoredFact:
    fact_id: str
    score: float


class InvertedIndex:
    """Immutable postings over a corpus; safe for concurrent queries."""

    def __init__(self, ids, postings, doc_lengths, params: Bm25Params, tokenizer: Tokenizer):
        self.ids: list[str] = list(ids)
        self.postings: dict[str, tuple[np.ndarray, np.ndarray]] = postings
        self.doc_lengths = np.asarray(doc_lengths, dtype=np.float64)
        self.doc_count = len(self.ids)
        self.avg_doc_length = float(np.mean(self.doc_lengths)) if self.doc_count else 0.0
        self.params = params
        self.tokenizer = tokenizer
        self._ids_arr = np.array(self.ids, dtype=np.str_)
        self._ordinal_of = {fact_id: i for i, fact_id in enumerate(self.ids)}
        self.doc_tokens: list[frozenset[str]] = self._invert_token_sets()

    def _invert_token_sets(self) -> list[frozenset[str]]:
        sets: list[set[str]] = [set() for _ in range(self.doc_count)]
        for token, (ordinals, _) in self.postings.items():
            for ordinal in ordinals:
                sets[int(ordinal)].add(token)
        return [frozenset(s) for s in sets]

    def ordinal_of(self, fact_id: str) -> int:
        return self._ordinal_of[fact_id]

    def tokens_of(self, fact_id: str) -> frozenset[str]:
        return self.doc_tokens[self._ordinal_of[fact_id]]

    def idf(self, token: str) -> float:
        ordinals, _ = self.postings[token]
        df = len(ordinals)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def build_index(
    corpus: Corpus,
    params: Bm25Params = Bm25Params(),
    tokenizer: Tokenizer = DEFAULT_TOKENIZER,
) -> InvertedIndex:
    """Index every fact; postings are ordered by ascending fact ordinal."""
    if len(corpus) == 0:
        raise ConfigError("cannot build an index over an empty corpus")
    raw: dict[str, list[tuple[int, int]]] = {}
    doc_lengths = []
    for ordinal, fact in enumerate(corpus.facts):
        sequence = tokenizer.sequence(fact.text)
        doc_lengths.append(len(sequence))
        counts: dict[str, int] = {}
        for token in sequence:
            counts[token] = counts.get(token, 0) + 1
        for token, tf in counts.items():
            raw.setdefault(token, []).append((ordinal, tf))
    postings = {
        token: (
            np.array([o for o, _ in plist], dtype=np.int64),
            np.array([tf for _, tf in plist], dtype=np.float64),
        )
        for token, plist in raw.items()
    }
    return InvertedIndex([f.id for f in corpus.facts], postings, doc_lengths, params, tokenizer)


def _dense_scores(index: InvertedIndex, query_tokens) -> np.ndarray | None:
    """BM25 scores for all documents, or None when no query term matches."""
    terms = sorted(t for t in set(query_tokens) if t in index.postings)
    if not terms:
        return None
    ordinals = np.concatenate([index.postings[t][0] for t in terms])
    tfs = np.concatenate([index.postings[t][1] for t in terms])
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    np.cumsum([len(index.postings[t][0]) for t in terms], out=offsets[1:])
    idfs = np.array([index.idf(t) for t in terms], dtype=np.float64)
    return bm25_accumulate(
        ordinals,
        tfs,
        offsets,
        idfs,
        index.doc_lengths,
        index.avg_doc_length,
        index.params.k1,
        index.params.b,
        index.doc_count,
    )


def _ranked(index: InvertedIndex, scores: np.ndarray, candidates: np.ndarray, top: int) -> list[ScoredFact]:
    """Sort candidates by descending score, ties by ascending fact id."""
    if len(candidates) == 0:
        return []
    order = np.lexsort((index._ids_arr[candidates], -scores[candidates]))
    chosen = candidates[order[:top]]
    return [ScoredFact(index.ids[int(o)], float(scores[int(o)])) for o in chosen]


def query(index: InvertedIndex, query_tokens, top_n: int) -> list[ScoredFact]:
    """Top-n facts by BM25; facts scoring 0 (no shared term) are dropped."""
    if top_n < 1:
        raise ConfigError(f"top_n must be >= 1, got {top_n}")
    scores = _dense_scores(index, query_tokens)
    if scores is None:
        return []
    return _ranked(index, scores, np.nonzero(scores)[0], top_n)


def query_constrained(
    index: InvertedIndex,
    query_tokens,
    must_overlap,
    exclude,
    top_m: int,
) -> list[ScoredFact]:
    """As `query`, but hits must share a token with every set in must_overlap
    and must not be in exclude."""
    if top_m < 1:
        raise ConfigError(f"top_m must be >= 1, got {top_m}")
    scores = _dense_scores(index, query_tokens)
    if scores is None:
        return []
    excluded_ordinals = {index._ordinal_of[f] for f in exclude if f in index._ordinal_of}
    required = [frozenset(ts) for ts in must_overlap]
    kept = [
        o
        for o in np.nonzero(scores)[0]
        if int(o) not in excluded_ordinals
        and all(not req.isdisjoint(index.doc_tokens[int(o)]) for req in required)
    ]
    return _ranked(index, scores, np.array(kept, dtype=np.int64), top_m)


def save_index(path, index: InvertedIndex) -> None:
    """Versioned structured-text snapshot; loading reproduces query results."""
    payload = {
        "params": {"k1": index.params.k1, "b": index.params.b},
        "tokenizer": {"stopwords": sorted(index.tokenizer.stopwords), "stem": index.tokenizer.stem},
        "ids": index.ids,
        "doc_lengths": [int(x) for x in index.doc_lengths],
        "postings": {
            token: [[int(o), int(tf)] for o, tf in zip(ordinals, tfs)]
            for token, (ordinals, tfs) in sorted(index.postings.items())
        },
    }
    text = INDEX_MAGIC + "\n" + json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n"
    atomic_write_text(path, text)


def load_index(path) -> InvertedIndex:
    with open(path, encoding="utf-8") as handle:
        magic = handle.readline().rstrip("\n")
        if magic != INDEX_MAGIC:
            raise FormatError(f"not a hopchain index (expected {INDEX_MAGIC!r}, got {magic!r})", line=1)
        try:
            payload = json.loads(handle.read())
        except json.JSONDecodeError as exc:
            raise FormatError(f"corrupt index payload: {exc.msg}") from exc
    params = Bm25Params(k1=float(payload["params"]["k1"]), b=float(payload["params"]["b"]))
    tokenizer = Tokenizer(
        stopwords=frozenset(payload["tokenizer"]["stopwords"]),
        stem=bool(payload["tokenizer"]["stem"]),
    )
    postings = {
        token: (
            np.array([o for o, _ in plist], dtype=np.int64),
            np.array([tf for _, tf in plist], dtype=np.float64),
        )
        for token, plist in payload["postings"].items()
    }
    return InvertedIndex(payload["ids"], postings, payload["doc_lengths"], params, tokenizer)
