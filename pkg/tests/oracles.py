"""Independent brute-force reference implementations used by the tests.

These share nothing with the engine's index/search code paths: scores are
recomputed per document from raw token sequences, candidates enumerated
exhaustively, and sorting done with plain Python keys.
"""

import math
from collections import Counter

from hopchain.corpus import Corpus, QAPair, Tokenizer


def bm25_all_scores(corpus: Corpus, tokenizer: Tokenizer, query_tokens, k1: float, b: float):
    """BM25 score of every fact, computed term-by-term from scratch."""
    sequences = {fact.id: tokenizer.sequence(fact.text) for fact in corpus.facts}
    lengths = {fid: len(seq) for fid, seq in sequences.items()}
    counts = {fid: Counter(seq) for fid, seq in sequences.items()}
    doc_count = len(corpus.facts)
    avgdl = sum(lengths.values()) / doc_count
    scores: dict[str, float] = {}
    for fid in sequences:
        total = 0.0
        for term in sorted(set(query_tokens)):
            tf = counts[fid].get(term, 0)
            if tf == 0:
                continue
            df = sum(1 for other in sequences.values() if term in other)
            idf = math.log(1.0 + (doc_count - df + 0.5) / (df + 0.5))
            total += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * lengths[fid] / avgdl))
        if total > 0.0:
            scores[fid] = total
    return scores


def bm25_topn(corpus: Corpus, tokenizer: Tokenizer, query_tokens, top_n: int, k1=1.2, b=0.75):
    """Ranked (fact_id, score) pairs: descending score, ascending id."""
    scores = bm25_all_scores(corpus, tokenizer, query_tokens, k1, b)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n]


def bm25_topn_constrained(
    corpus: Corpus, tokenizer: Tokenizer, query_tokens, must_overlap, exclude, top_m, k1=1.2, b=0.75
):
    scores = bm25_all_scores(corpus, tokenizer, query_tokens, k1, b)
    token_sets = {fact.id: tokenizer.tokens(fact.text) for fact in corpus.facts}
    kept = {
        fid: score
        for fid, score in scores.items()
        if fid not in exclude
        and all(not frozenset(req).isdisjoint(token_sets[fid]) for req in must_overlap)
    }
    ranked = sorted(kept.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_m]


def mips_topk(ids, matrix, query, k, exclude=frozenset()):
    """Exhaustive inner products + full stable sort."""
    scored = []
    for fid, row in zip(ids, matrix):
        if fid in exclude:
            continue
        scored.append((fid, float(sum(float(a) * float(b) for a, b in zip(row, query)))))
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return scored[:k]


def syntactic_chain_enumerator(corpus: Corpus, tokenizer: Tokenizer, qa: QAPair, n, m, k, k1=1.2, b=0.75):
    """Score every hop-1 x hop-2 pair directly and rank by summed score.

    Returns (f1, f2, s1, s2) tuples in final ranked order.
    """
    qa_tokens = tokenizer.tokens(f"{qa.question} {qa.answer}")
    token_sets = {fact.id: tokenizer.tokens(fact.text) for fact in corpus.facts}
    pairs = []
    for f1, s1 in bm25_topn(corpus, tokenizer, qa_tokens, n, k1, b):
        hop2 = bm25_topn_constrained(
            corpus,
            tokenizer,
            qa_tokens | token_sets[f1],
            [qa_tokens, token_sets[f1]],
            {f1},
            m,
            k1,
            b,
        )
        for f2, s2 in hop2:
            pairs.append((f1, f2, s1, s2))
    best: dict[frozenset, tuple] = {}
    for f1, f2, s1, s2 in pairs:
        key = frozenset((f1, f2))
        held = best.get(key)
        score = s1 + s2
        if (
            held is None
            or score > held[2] + held[3]
            or (score == held[2] + held[3] and (f1, f2) < (held[0], held[1]))
        ):
            best[key] = (f1, f2, s1, s2)
    ranked = sorted(best.values(), key=lambda t: (-(t[2] + t[3]), t[0], t[1]))
    return ranked[:k]
