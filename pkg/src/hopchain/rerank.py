"""Candidate re-ranking against a pluggable score table, plus construction
of the labeled dataset used to train an external chain-validity classifier.

Score tables usually come from the encoder bridge's classifier; the
built-in baseline (retrieval-score sum) lets the engine run standalone.
"""

import hashlib
import logging
import math
from dataclasses import dataclass

import numpy as np

from .chains import ChainCandidate
from .corpus import Corpus
from .errors import ConfigError, FormatError
from .evaluation import GoldRecord
from .fileio import atomic_write_text, data_lines, dump_json_line, format_float
import json

logger = logging.getLogger(__name__)

LABEL_VALID = "valid"
LABEL_INVALID = "invalid"


def chain_key(f1: str, f2: str) -> str:
    """Canonical unordered key: ascending fact id, joined by '|'."""
    return f"{f1}|{f2}" if f1 <= f2 else f"{f2}|{f1}"


class ScoreTable:
    """(qid, unordered chain) -> validity score; higher means more valid.

    Colliding keys (e.g. both orientations of one pair) keep the maximum.
    """

    def __init__(self):
        self._scores: dict[tuple[str, str], float] = {}

    def set(self, qid: str, f1: str, f2: str, score: float) -> None:
        if not math.isfinite(score):
            raise ConfigError(f"score for ({qid}, {chain_key(f1, f2)}) is not finite: {score!r}")
        key = (qid, chain_key(f1, f2))
        held = self._scores.get(key)
        self._scores[key] = score if held is None else max(held, score)

    def get(self, qid: str, f1: str, f2: str) -> float | None:
        return self._scores.get((qid, chain_key(f1, f2)))

    def __len__(self) -> int:
        return len(self._scores)

    def items(self):
        return self._scores.items()


def rerank(candidates: list[ChainCandidate], scores: ScoreTable, qid: str, k: int) -> list[ChainCandidate]:
    """Reorder by descending table score (ties keep original rank) and cut
    to k; unscored candidates fall below every scored one, in input order."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    decorated = []
    for position, cand in enumerate(candidates):
        score = scores.get(qid, cand.f1, cand.f2)
        missing = score is None
        decorated.append((missing, 0.0 if missing else -score, position, cand))
    decorated.sort(key=lambda item: item[:3])
    return [cand for *_, cand in decorated[:k]]


def baseline_scores(candidates_by_qid) -> ScoreTable:
    """Retrieval-sum fallback scorer: each chain scores its own `score`."""
    table = ScoreTable()
    for qid, candidates in candidates_by_qid.items():
        for cand in candidates:
            table.set(qid, cand.f1, cand.f2, cand.score)
    return table


@dataclass(frozen=True)
class RerankDatasetRecord:
    qid: str
    question: str
    answer: str
    f1_text: str
    f2_text: str
    label: str

    def __post_init__(self):
        if self.label not in (LABEL_VALID, LABEL_INVALID):
            raise ValueError(f"label must be valid/invalid, got {self.label!r}")


def _sampling_seed(seed: int, qid: str) -> int:
    digest = hashlib.sha256(f"{seed}:rerank-dataset:{qid}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


def build_rerank_dataset(
    gold: list[GoldRecord],
    candidate_pool,
    corpus: Corpus,
    negatives_per_positive: int = 2,
    seed: int = 0,
) -> list[RerankDatasetRecord]:
    """Emit, per question, the gold chain in both orientations (positives)
    plus a seeded sample of non-gold pool chains (negatives).

    Negative count per question is negatives_per_positive * 2. Pools too
    small to cover it contribute every chain they have; the shortfall is
    logged as a warning with a per-question count.
    """
    if negatives_per_positive < 1:
        raise ConfigError(f"negatives_per_positive must be >= 1, got {negatives_per_positive}")
    records: list[RerankDatasetRecord] = []
    shortfalls = 0
    for entry in gold:
        qid = entry.chain.qid
        if qid not in candidate_pool:
            raise ConfigError(f"no candidate pool for gold qid {qid!r}")
        gold_pair = entry.chain.unordered()
        text_1 = corpus.text_of(entry.chain.f1)
        text_2 = corpus.text_of(entry.chain.f2)
        for first, second in ((text_1, text_2), (text_2, text_1)):
            records.append(
                RerankDatasetRecord(
                    qid=qid,
                    question=entry.qa.question,
                    answer=entry.qa.answer,
                    f1_text=first,
                    f2_text=second,
                    label=LABEL_VALID,
                )
            )
        unique: list[ChainCandidate] = []
        seen: set[frozenset[str]] = set()
        for cand in candidate_pool[qid]:
            pair = frozenset((cand.f1, cand.f2))
            if pair == gold_pair or pair in seen:
                continue
            seen.add(pair)
            unique.append(cand)
        wanted = negatives_per_positive * 2
        if len(unique) < wanted:
            shortfalls += 1
            logger.warning(
                "qid %s: only %d unique non-gold candidates for %d requested negatives",
                qid,
                len(unique),
                wanted,
            )
            chosen = list(range(len(unique)))
        else:
            rng = np.random.default_rng(_sampling_seed(seed, qid))
            chosen = list(rng.permutation(len(unique))[:wanted])
        for position in chosen:
            cand = unique[int(position)]
            records.append(
                RerankDatasetRecord(
                    qid=qid,
                    question=entry.qa.question,
                    answer=entry.qa.answer,
                    f1_text=corpus.text_of(cand.f1),
                    f2_text=corpus.text_of(cand.f2),
                    label=LABEL_INVALID,
                )
            )
    if shortfalls:
        logger.warning("%d question(s) had too few candidates for the requested negatives", shortfalls)
    return records


def save_dataset(path, records: list[RerankDatasetRecord], header: str | None = None) -> None:
    lines = [] if header is None else [header]
    for r in records:
        lines.append(
            dump_json_line(
                {
                    "qid": r.qid,
                    "question": r.question,
                    "answer": r.answer,
                    "f1_text": r.f1_text,
                    "f2_text": r.f2_text,
                    "label": r.label,
                }
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_dataset(path) -> list[RerankDatasetRecord]:
    records = []
    for number, line in data_lines(path):
        try:
            raw = json.loads(line)
            records.append(
                RerankDatasetRecord(
                    qid=str(raw["qid"]),
                    question=str(raw["question"]),
                    answer=str(raw["answer"]),
                    f1_text=str(raw["f1_text"]),
                    f2_text=str(raw["f2_text"]),
                    label=str(raw["label"]),
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise FormatError(f"bad dataset record: {exc}", line=number) from exc
    return records


def save_scores(path, table: ScoreTable, header: str | None = None) -> None:
    """Score file: `<qid><TAB><f1>|<f2><TAB><score>`, sorted for stability."""
    lines = [] if header is None else [header]
    for (qid, key), score in sorted(table.items()):
        lines.append(f"{qid}\t{key}\t{format_float(score)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_scores(path) -> ScoreTable:
    table = ScoreTable()
    for number, line in data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"expected '<qid>\\t<f1>|<f2>\\t<score>', got {line!r}", line=number)
        qid, key, score_text = parts
        left, sep, right = key.partition("|")
        if not sep or not left or not right:
            raise FormatError(f"bad chain key {key!r}", line=number)
        try:
            score = float(score_text)
        except ValueError as exc:
            raise FormatError(f"bad score {score_text!r}", line=number) from exc
        if not math.isfinite(score):
            raise FormatError(f"non-finite score {score_text!r}", line=number)
        table.set(qid, left, right, score)
    return table
