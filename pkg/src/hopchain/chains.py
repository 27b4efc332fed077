"""Two-hop chain construction: lexical (keyword-overlap), dense (MIPS +
re-encoder), and the positional hybrid merge of the two candidate lists.

A chain is an ordered fact pair scored by the sum of its two hop scores.
(a, b) and (b, a) describe the same explanation, so candidate lists are
deduplicated on the unordered pair, keeping the higher-scored orientation.
"""

import json
import math
from dataclasses import dataclass

from .corpus import DEFAULT_TOKENIZER, Corpus, QAPair, Tokenizer
from .dense import DenseIndex, mips_top_k
from .errors import DimensionError, FormatError
from .fileio import atomic_write_text, dump_json_line
from .lexical import InvertedIndex, query, query_constrained
from .reencoder import ReEncoderModel, reencode

SOURCES = ("syntactic", "semantic")


@dataclass(frozen=True)
class ChainCandidate:
    f1: str
    f2: str
    s1: float
    s2: float
    score: float
    source: str

    def __post_init__(self):
        if self.f1 == self.f2:
            raise ValueError(f"self-chain ({self.f1!r}, {self.f1!r})")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, got {self.source!r}")
        if not math.isfinite(self.score) or abs(self.score - (self.s1 + self.s2)) > 1e-9:
            raise ValueError(f"score {self.score} != s1+s2 = {self.s1 + self.s2}")

    @classmethod
    def make(cls, f1: str, f2: str, s1: float, s2: float, source: str) -> "ChainCandidate":
        return cls(f1=f1, f2=f2, s1=s1, s2=s2, score=s1 + s2, source=source)

    def unordered_key(self) -> tuple[str, str]:
        return (self.f1, self.f2) if self.f1 <= self.f2 else (self.f2, self.f1)


@dataclass(frozen=True)
class PipelineConfig:
    """Stage sizes: hop-1/hop-2 candidate counts and the chain cutoff for
    both pipelines, plus the hybrid replacement fraction.

    Deliberately lenient: bounds are reported by config.validate rather
    than enforced here.
    """

    n_first: int = 20
    m_second: int = 4
    k_chains: int = 10
    semantic_n: int = 5
    semantic_m: int = 2
    merge_fraction: float = 0.25


def _dedupe_and_rank(candidates: list[ChainCandidate], k_chains: int) -> list[ChainCandidate]:
    """Collapse unordered duplicates (higher score wins, then lexicographic
    orientation), sort by descending score with (f1, f2) tie-break, cut to k."""
    best: dict[tuple[str, str], ChainCandidate] = {}
    for cand in candidates:
        key = cand.unordered_key()
        held = best.get(key)
        if (
            held is None
            or cand.score > held.score
            or (cand.score == held.score and (cand.f1, cand.f2) < (held.f1, held.f2))
        ):
            best[key] = cand
    ranked = sorted(best.values(), key=lambda c: (-c.score, c.f1, c.f2))
    return ranked[: max(k_chains, 0)]


def syntactic_chains(index: InvertedIndex, qa: QAPair, cfg: PipelineConfig) -> list[ChainCandidate]:
    """Keyword-overlap pipeline: hop-1 facts from the Q-A query, hop-2 facts
    constrained to share a token with the Q-A pair and with the first fact."""
    qa_tokens = index.tokenizer.tokens(qa.combined_text())
    pairs: list[ChainCandidate] = []
    for first in query(index, qa_tokens, cfg.n_first):
        f1_tokens = index.tokens_of(first.fact_id)
        seconds = query_constrained(
            index,
            qa_tokens | f1_tokens,
            must_overlap=[qa_tokens, f1_tokens],
            exclude={first.fact_id},
            top_m=cfg.m_second,
        )
        for second in seconds:
            pairs.append(
                ChainCandidate.make(first.fact_id, second.fact_id, first.score, second.score, "syntactic")
            )
    return _dedupe_and_rank(pairs, cfg.k_chains)


def semantic_chains(
    dindex: DenseIndex,
    model: ReEncoderModel,
    q_embedding,
    qa: QAPair,
    corpus: Corpus,
    cfg: PipelineConfig,
    tokenizer: Tokenizer = DEFAULT_TOKENIZER,
) -> list[ChainCandidate]:
    """Dense pipeline: MIPS hop-1, re-encoded query for hop-2, then the
    concept filter (hop-2 fact must mention a question or answer token)."""
    if dindex.dim != model.dim:
        raise DimensionError(f"index dim {dindex.dim} != model dim {model.dim}")
    concept_tokens = tokenizer.tokens(qa.question) | tokenizer.tokens(qa.answer)
    pairs: list[ChainCandidate] = []
    for first in mips_top_k(dindex, q_embedding, cfg.semantic_n):
        q_r = reencode(model, q_embedding, dindex.embedding_of(first.fact_id))
        for second in mips_top_k(dindex, q_r, cfg.semantic_m, exclude={first.fact_id}):
            fact_tokens = tokenizer.tokens(corpus.text_of(second.fact_id))
            if fact_tokens.isdisjoint(concept_tokens):
                continue
            pairs.append(
                ChainCandidate.make(first.fact_id, second.fact_id, first.score, second.score, "semantic")
            )
    return _dedupe_and_rank(pairs, cfg.k_chains)


def merge_candidates(
    syntactic: list[ChainCandidate],
    semantic: list[ChainCandidate],
    cfg: PipelineConfig,
) -> list[ChainCandidate]:
    """Replace the lowest-ranked merge_fraction of the syntactic list with
    the top semantic candidates.

    Semantic entries already present in the preserved prefix (as unordered
    pairs) are skipped and further entries pulled in; if the semantic list
    runs out, the output is simply shorter.
    """
    replaceable = math.floor(cfg.merge_fraction * len(syntactic))
    take = min(replaceable, len(semantic))
    merged = list(syntactic[: len(syntactic) - take])
    seen = {cand.unordered_key() for cand in merged}
    appended = 0
    for cand in semantic:
        if appended == take:
            break
        key = cand.unordered_key()
        if key in seen:
            continue
        seen.add(key)
        merged.append(cand)
        appended += 1
    return merged


def save_chains(path, chains_by_qid: dict[str, list[ChainCandidate]], header: str | None = None) -> None:
    """One JSON record per question: {"qid": ..., "chains": [...]}."""
    lines = [] if header is None else [header]
    for qid, chain_list in chains_by_qid.items():
        record = {
            "qid": qid,
            "chains": [
                {"f1": c.f1, "f2": c.f2, "s1": c.s1, "s2": c.s2, "score": c.score, "source": c.source}
                for c in chain_list
            ],
        }
        lines.append(dump_json_line(record))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_chains(path) -> dict[str, list[ChainCandidate]]:
    chains: dict[str, list[ChainCandidate]] = {}
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", line=number) from exc
            if "qid" not in record or "chains" not in record:
                raise FormatError("chain record needs 'qid' and 'chains'", line=number)
            qid = str(record["qid"])
            if qid in chains:
                raise FormatError(f"duplicate qid {qid!r}", line=number)
            try:
                chains[qid] = [
                    ChainCandidate(
                        f1=str(c["f1"]),
                        f2=str(c["f2"]),
                        s1=float(c["s1"]),
                        s2=float(c["s2"]),
                        score=float(c["score"]),
                        source=str(c["source"]),
                    )
                    for c in record["chains"]
                ]
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"bad chain entry: {exc}", line=number) from exc
    return chains
